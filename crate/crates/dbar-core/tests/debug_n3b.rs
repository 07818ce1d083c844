use dbar_core::fields::*;
use dbar_core::geometry::*;
use dbar_core::operators::composite::*;
use dbar_core::operators::SlotEngine;
use dbar_core::solver::*;
use dbar_core::Complex64;

#[test]
fn n3_group_diagnostics() {
    let phi = parse_expression(
        "z1*conj(z1)*z3 + conj(z2)*z3^2 + 0.4*conj(z3)*z2 + 0.2*conj(z1)*conj(z2)", 3,
    ).unwrap();
    let comps: Vec<MonomialField> = (0..3).map(|j| phi.dbar(j)).collect();

    // exact groups via the oracle
    let g1_exact = comps[1].p_slot(0).t_slot(1).sub(&comps[1].t_slot(1));
    let g2_exact = comps[2].p_slot(0).p_slot(1).t_slot(2).sub(&comps[2].t_slot(2));

    for (nr, nt) in [(10, 30), (14, 42), (20, 60)] {
        let quad = make_disc_grid(nr, nt, 0.15).unwrap();
        let eval = make_eval_set(2, 4, 0.15).unwrap();
        let eng = SlotEngine::new(&DomainSpec::UnitDisc, &quad, &eval).unwrap();
        let terms: Vec<Vec<(Complex64, Vec<(u32, u32)>)>> =
            comps.iter().map(rank1_terms).collect();
        let slot = |comp: usize, t: usize, s: usize, idx: &[usize; 3]| -> Rank1Slot {
            let (a, b) = terms[comp][t].1[s];
            Rank1Slot::monomial(&eng, a, b, idx[s])
        };
        let mut worst1: f64 = 0.0;
        let mut worst2a: f64 = 0.0; // singles in group 2
        let mut worst2b: f64 = 0.0; // tbb terms
        let mut worst2c: f64 = 0.0; // chain + A terms
        for i0 in [0usize, 3] {
            for i1 in [1usize, 5] {
                for i2 in [2usize, 7] {
                    let idx = [i0, i1, i2];
                    let z: Vec<Complex64> = (0..3).map(|k| eng.e_omega[idx[k]]).collect();
                    // group 1
                    let mut g1 = Complex64::new(0.0, 0.0);
                    for (t, (c, _)) in terms[1].iter().enumerate() {
                        let g = [slot(1, t, 0, &idx), slot(1, t, 1, &idx), slot(1, t, 2, &idx)];
                        g1 += c * g[2].at_e * tb_term(&eng, idx[1], idx[0], &g[1], &g[0]);
                    }
                    for (t, (c, _)) in terms[0].iter().enumerate() {
                        let g = [slot(0, t, 0, &idx), slot(0, t, 1, &idx), slot(0, t, 2, &idx)];
                        g1 += c * g[2].at_e * tb_term(&eng, idx[0], idx[1], &g[0], &g[1]);
                    }
                    worst1 = worst1.max((g1 - g1_exact.eval(&z)).norm());

                    // group 2 split: singles / tbb / chain+A
                    let mut s_single = Complex64::new(0.0, 0.0);
                    let mut s_tbb = Complex64::new(0.0, 0.0);
                    let mut s_chain = Complex64::new(0.0, 0.0);
                    for (t, (c, _)) in terms[2].iter().enumerate() {
                        let g = [slot(2, t, 0, &idx), slot(2, t, 1, &idx), slot(2, t, 2, &idx)];
                        s_single += c * g[1].at_e * tb_term(&eng, idx[2], idx[0], &g[2], &g[0]);
                        s_single += c * g[0].at_e * tb_term(&eng, idx[2], idx[1], &g[2], &g[1]);
                        s_tbb += c * tbb_term(&eng, idx[2], idx[0], idx[1], &g[2], &g[0], &g[1]);
                    }
                    for (t, (c, _)) in terms[1].iter().enumerate() {
                        let g = [slot(1, t, 0, &idx), slot(1, t, 1, &idx), slot(1, t, 2, &idx)];
                        s_single += c * g[0].at_e * tb_term(&eng, idx[1], idx[2], &g[1], &g[2]);
                        s_tbb += c * tbb_term(&eng, idx[1], idx[0], idx[2], &g[1], &g[0], &g[2]);
                    }
                    for (t, (c, exps)) in terms[0].iter().enumerate() {
                        let g = [slot(0, t, 0, &idx), slot(0, t, 1, &idx), slot(0, t, 2, &idx)];
                        s_single += c * g[1].at_e * tb_term(&eng, idx[0], idx[2], &g[0], &g[2]);
                        let d1 = Rank1Slot::monomial_dbar(&eng, exps[1].0, exps[1].1, idx[1]);
                        s_chain += c * tchain_a_pair(&eng, idx[0], idx[1], idx[2], &g[0], &d1, &g[2]);
                        let d2 = Rank1Slot::monomial_dbar(&eng, exps[2].0, exps[2].1, idx[2]);
                        s_chain += c * tchain_a_pair(&eng, idx[0], idx[2], idx[1], &g[0], &d2, &g[1]);
                    }
                    let g2_num = s_single + s_tbb + s_chain;
                    worst2a = worst2a.max((g2_num - g2_exact.eval(&z)).norm());
                    let _ = (worst2b, worst2c);
                    worst2b = worst2b.max(s_tbb.norm());
                    worst2c = worst2c.max(s_chain.norm());
                }
            }
        }
        println!(
            "{nr}x{nt}: group1 err {worst1:.3e}  group2 err {worst2a:.3e}  (|tbb| up to {worst2b:.3e}, |chain+A| up to {worst2c:.3e})"
        );
    }
}
