use dbar_core::fields::*;
use dbar_core::geometry::*;
use dbar_core::solver::*;

fn rel_err(s3: GridParams, expr: &str) -> f64 {
    let c = SolverContext::new(
        &DomainSpec::UnitDisc, 3, GridParams::default(), Some(s3), Tolerances::default(),
    ).unwrap();
    let phi = parse_expression(expr, 3).unwrap();
    let f = OneForm::from_monomials(vec![phi.dbar(0), phi.dbar(1), phi.dbar(2)]).unwrap();
    let out = c.canonical_solve(&f, SolveMethod::Section3).unwrap();
    let oracle = c.oracle_solve(&f).unwrap();
    let exact = sample_on_eval(&ScalarField::Monomials(oracle), &c.s3_grid).unwrap();
    let err = out.field.tensor.sub(&exact.tensor).sup_norm();
    err / exact.tensor.sup_norm().max(1e-12)
}

#[test]
fn n3_section3_vs_oracle() {
    let exprs = [
        "z1*conj(z1)*z3 + conj(z2)*z3^2 + 0.4*conj(z3)*z2 + 0.2*conj(z1)*conj(z2)",
        "conj(z1)*conj(z2)*conj(z3) + z2^2*conj(z3) + 0.7*z1*conj(z2)",
    ];
    for expr in exprs {
        let mut errs = Vec::new();
        for (nr, nt) in [(10, 30), (12, 36), (14, 44)] {
            let s3 = GridParams { n_r: nr, n_theta: nt, margin: 0.2, eval_n_r: 2, eval_n_theta: 4 };
            let t0 = std::time::Instant::now();
            let e = rel_err(s3, expr);
            errs.push((e, t0.elapsed().as_secs_f64()));
        }
        println!("errs: {:?}", errs);
        assert!(errs.iter().all(|e| e.0 < 1e-2));
    }
}
