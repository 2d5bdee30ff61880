//! The `verify` suites. Each returns unordered checks; the report sorts them.

use nalgebra::DVector;
use qks::ball::{
    cayley, cayley_inv, convergence_order, curvature_deviation, point_reports, sample_points, verify_naji_fd,
    verify_xi_equation, BallPoint, SiegelPoint, CURVATURE_H, DEFAULT_H,
};
use qks::batch;
use qks::classification::{
    build_class_element, class_ranks, classify, dim_v, equivariance_check, formula_dims, is_in_v, project_classes,
    project_unchecked, random_hat, random_in_v, ClassParams, QkClass, PRESENCE_THRESHOLD,
};
use qks::curvature::{check_jjqk, constant_qk_curvature, einstein_residual, r_tilde, ricci_of};
use qks::homogeneous::{
    gsbcd, lambda_isomorphism_residual, m_lambda, qk3_bracket_table, qk3_structure, reductive_pair_from,
    solvable_algebra_with, solvable_S,
};
use qks::qh_space::{make_qh_space, GroupElement};
use qks::quaternion::seeded_rng;
use qks::tensor3::{inner, l_op_unchecked, Covector, Tensor3, MEMBERSHIP_TOL};
use qks::Result;

use crate::report::Check;

const MUS: [f64; 3] = [0.5, 1.0, 2.0];
const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn least(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, f64::min)
}

fn label_mismatch(got: &[usize], want: &[usize]) -> f64 {
    let extra = got.iter().filter(|c| !want.contains(c)).count();
    let missing = want.iter().filter(|c| !got.contains(c)).count();
    (extra + missing) as f64
}

pub fn classification(n: usize, seed: u64) -> Result<Vec<Check>> {
    let space = make_qh_space(n)?;
    let mut rng = seeded_rng(seed);
    let mut checks = Vec::new();

    if n <= 3 {
        let ranks = class_ranks(n)?;
        let formula = formula_dims(n);
        for i in 0..5 {
            checks.push(Check::equal(format!("dims.qk{}", i + 1), ranks[i] as f64, formula[i] as f64));
        }
        checks.push(Check::equal("dims.total", ranks.iter().sum::<usize>() as f64, dim_v(n) as f64));
    }

    let hats: Vec<Tensor3> = (0..20).map(|_| random_hat(&space, &mut rng)).collect();
    let l_quad = batch::map(&hats, |h| {
        let lh = l_op_unchecked(h, &space);
        let quad = &(&l_op_unchecked(&lh, &space) + &lh.scale(2.0)) - &h.scale(8.0);
        quad.norm() / h.norm()
    });
    checks.push(Check::below("l_operator.quadratic", worst(l_quad), 1e-11));

    let samples: Vec<Tensor3> = (0..20).map(|_| random_in_v(&space, &mut rng)).collect();
    let stats = batch::map(&samples, |s| -> Result<[f64; 3]> {
        let dec = project_classes(s, &space, MEMBERSHIP_TOL)?;
        let mut idem: f64 = 0.0;
        for (i, part) in dec.parts.iter().enumerate() {
            if part.norm() > 0.0 {
                let again = project_unchecked(part, &space);
                idem = idem.max((&again.parts[i] - part).norm() / s.norm());
            }
        }
        Ok([dec.reconstruction_residual(s) / s.norm(), dec.orthogonality_residual(), idem])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    checks.push(Check::below("decomposition.reconstruction", worst(stats.iter().map(|s| s[0])), 1e-11));
    checks.push(Check::below("decomposition.orthogonality", worst(stats.iter().map(|s| s[1])), 1e-11));
    checks.push(Check::below("decomposition.idempotence", worst(stats.iter().map(|s| s[2])), 1e-11));
    let l45 = worst(samples.iter().map(|s| {
        let dec = project_unchecked(s, &space);
        inner(&dec.parts[3], &dec.parts[4]).unwrap_or(f64::NAN).abs() / s.norm().powi(2)
    }));
    checks.push(Check::below("l_operator.eigen_split_orthogonal", l45, 1e-11));

    let mut equiv: f64 = 0.0;
    let mut label_changes = 0.0;
    for k in 0..10 {
        let a = GroupElement::random(n, &mut rng);
        let s = &samples[k];
        equiv = equiv.max(equivariance_check(s, &a, &space)?);
        let class = QkClass::ALL[k % 5];
        let params = match class {
            QkClass::One | QkClass::Three => ClassParams::Theta(Covector::random(n, &mut rng)),
            QkClass::Two => ClassParams::Thetas([0, 1, 2].map(|_| Covector::random(n, &mut rng))),
            _ => ClassParams::Seed(Tensor3::random_antisymmetric(n, &mut rng)),
        };
        let t = build_class_element(class, &params, &space)?;
        let before = classify(&t, &space, PRESENCE_THRESHOLD)?.indices();
        let after = classify(&qks::tensor3::act_on_tensor(&a, &t)?, &space, PRESENCE_THRESHOLD)?.indices();
        label_changes += label_mismatch(&after, &before) + label_mismatch(&before, &[class.index()]);
    }
    checks.push(Check::below("equivariance.projection", equiv, 1e-10));
    checks.push(Check::equal("equivariance.labels", label_changes, 0.0));

    let neg = least((0..20).map(|_| {
        let t = Tensor3::random_antisymmetric(n, &mut rng);
        is_in_v(&t, &space).map(|m| m.relative).unwrap_or(f64::NAN)
    }));
    checks.push(Check::above("negative_control.relative_residual", neg, 1e-2));
    Ok(checks)
}

pub fn models(n: usize) -> Result<Vec<Check>> {
    let space = make_qh_space(n)?;
    let d = space.dim();
    let mut checks = Vec::new();

    let nu_q = -0.75;
    let r = constant_qk_curvature(nu_q, &space);
    checks.push(Check::below("curvature.symmetries", r.symmetry_residuals().max(), 1e-12));
    checks.push(Check::below("curvature.jjqk", check_jjqk(&r, &space), 1e-12));
    let ric = ricci_of(&r);
    checks.push(Check::below("curvature.einstein", einstein_residual(&ric), 1e-12));
    let nf = n as f64;
    let want = 16.0 * nf * (nf + 2.0) * nu_q;
    checks.push(Check::below("curvature.scalar", ((ric.scalar - want) / want).abs(), 1e-12));

    let mut koszul: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for mu in MUS {
        koszul = koszul.max((&solvable_S(mu, n)? - &gsbcd(mu, n)?).max_abs());
        defect = defect.max(solvable_algebra_with(n, mu, 1.0 / mu, -mu)?.qk_defect());
    }
    checks.push(Check::below("solvable.koszul_vs_closed_form", koszul, 1e-11));
    checks.push(Check::below("solvable.qk_defect", defect, 1e-12));
    let label = classify(&solvable_S(1.0, n)?, &space, PRESENCE_THRESHOLD)?;
    checks.push(Check::equal("solvable.label", label_mismatch(&label.indices(), &[1, 3, 4]), 0.0));
    let off = label.relative_norms[1].max(label.relative_norms[4]);
    checks.push(Check::below("solvable.off_class_mass", off, 1e-10));

    let mut xi0 = DVector::zeros(d);
    xi0[0] = 1.0;
    let mut jac: f64 = 0.0;
    let mut table: f64 = 0.0;
    let mut hdim_err = 0.0;
    let mut sp1: f64 = 0.0;
    let mut skew: f64 = 0.0;
    let mut rt_xi: f64 = 0.0;
    let mut ad: f64 = 0.0;
    let mut iso: f64 = 0.0;
    for lambda in LAMBDAS {
        let xi = &xi0 * lambda.sqrt();
        let s = qk3_structure(&space, &xi)?;
        let rt = r_tilde(&constant_qk_curvature(-lambda, &space), &s)?;
        let pair = reductive_pair_from(&s, &rt, &space)?;
        let t = qk3_bracket_table(lambda, &space)?;
        jac = jac.max(pair.jacobi_residual());
        table = table.max(t.distance(&pair)?);
        hdim_err += (pair.h_dim() as f64 - 3.0).abs();
        let c = t.structure();
        sp1 = sp1.max((c.get(0, 1, 2) - 2.0).abs()).max((c.get(1, 2, 0) - 2.0).abs()).max((c.get(2, 0, 1) - 2.0).abs());
        skew = skew.max(pair.skewness_residual());
        for x in 0..d {
            for y in 0..d {
                rt_xi = rt_xi.max((rt.basis_endomorphism(x, y) * &xi).amax());
            }
        }
        ad = ad.max(m_lambda(lambda, n)?.ad_invariance_residual()?);
        iso = iso.max(lambda_isomorphism_residual(lambda, n)?);
    }
    checks.push(Check::below("qk3.jacobi", jac, 1e-10));
    checks.push(Check::below("qk3.table_vs_pair", table, 1e-10));
    checks.push(Check::equal("qk3.h_dim_error", hdim_err, 0.0));
    checks.push(Check::below("qk3.sp1_relation", sp1, 1e-12));
    checks.push(Check::below("qk3.skewness", skew, 1e-12));
    checks.push(Check::below("qk3.r_tilde_xi", rt_xi, 1e-11));
    checks.push(Check::below("qk3.m_lambda_ad_invariance", ad, 1e-12));
    checks.push(Check::below("qk3.isomorphism", iso, 1e-12));
    let angle = m_lambda(0.5, n)?.principal_angle(&m_lambda(2.0, n)?)?;
    checks.push(Check::above("qk3.m_lambda_injective_angle", angle, 1e-6));
    Ok(checks)
}

pub fn ball(n: usize, seed: u64) -> Result<Vec<Check>> {
    let c = -4.0;
    let mut checks = Vec::new();
    let points = sample_points(n, c, 20, seed)?;
    let reports = point_reports(&points, DEFAULT_H)?;
    for r in &reports {
        let p = format!("point.{:02}", r.index);
        checks.push(Check::below(format!("{p}.hermitian"), r.hermitian, 1e-11));
        checks.push(Check::below(format!("{p}.xi_norm"), r.xi_norm_error, 1e-10));
        checks.push(Check::below(format!("{p}.xi_equation"), r.xi_equation, 1e-6));
        checks.push(Check::below(format!("{p}.naji"), r.naji, 1e-6));
        checks.push(Check::below(format!("{p}.pushforward"), r.pushforward, 1e-6));
    }
    let p0 = &points[0];
    checks.push(Check::above("order.xi_equation", convergence_order(|h| verify_xi_equation(p0, h), 1e-3)?, 1.8));
    checks.push(Check::above(
        "order.naji",
        convergence_order(|h| verify_naji_fd(p0, h).map(|f| f.residual), 1e-3)?,
        1.8,
    ));
    checks.push(Check::below("curvature.origin", curvature_deviation(&BallPoint::origin(n, c)?, CURVATURE_H)?, 1e-3));
    let mut rng = seeded_rng(seed);
    let mut round: f64 = 0.0;
    for _ in 0..20 {
        let chi = SiegelPoint::random(n, &mut rng);
        round = round.max((cayley(&cayley_inv(c, &chi)?)?.to_coords() - chi.to_coords()).amax());
    }
    checks.push(Check::below("cayley.round_trip", round, 1e-12));
    Ok(checks)
}
