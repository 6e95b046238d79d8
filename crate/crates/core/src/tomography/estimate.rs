//! Probe estimation from an error matrix.
//!
//! States are fitted assuming ideal measurements and effects assuming ideal
//! states. Both are constrained least-squares problems solved by projected
//! gradient descent with backtracking.

use crate::error::{QptError, Result};
use crate::experiment::{ideal_probes, ProbeSet};
use crate::quantum::channel::{apply_chi, MeasOperator, ProcessMatrix, QuantumState};
use crate::quantum::matrix::{
    frobenius, from_eigen, hermitian_eigen, hermitize, identity, map_eigenvalues, project_simplex, real_inner,
    ComplexMatrix,
};

use super::reconstruct::ReconstructionOptions;

/// Frobenius projection onto density matrices.
pub fn project_density(rho: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(rho);
    from_eigen(&project_simplex(&vals, 1.0), &vecs)
}

/// Frobenius projection of a measurement group onto `{M_b ⪰ 0, Σ_b M_b = I}`.
pub fn project_povm_group(effects: &[ComplexMatrix], opts: &ReconstructionOptions) -> Result<Vec<ComplexMatrix>> {
    let k = effects.len();
    let d = effects[0].nrows();
    let id = identity(d);
    if k == 2 {
        // pairs reduce to clipping (A + I − B)/2 into [0, I]
        let m0 = map_eigenvalues(&((&effects[0] + &id - &effects[1]) * crate::quantum::matrix::c(0.5, 0.0)), |v| {
            v.clamp(0.0, 1.0)
        });
        let m1 = &id - &m0;
        return Ok(vec![m0, m1]);
    }
    let complete = |ms: &mut Vec<ComplexMatrix>| {
        let excess = ms.iter().fold(-&id, |acc, m| acc + m) / crate::quantum::matrix::c(k as f64, 0.0);
        for m in ms.iter_mut() {
            *m -= &excess;
        }
    };
    let mut x: Vec<ComplexMatrix> = effects.iter().map(hermitize).collect();
    let mut p: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(d, d); k];
    for _ in 0..opts.max_iterations {
        let y: Vec<ComplexMatrix> = x
            .iter()
            .zip(&p)
            .map(|(a, b)| map_eigenvalues(&(a + b), |v| v.max(0.0)))
            .collect();
        for b in 0..k {
            p[b] = &x[b] + &p[b] - &y[b];
        }
        let mut next = y;
        complete(&mut next);
        let step: f64 = next.iter().zip(&x).map(|(a, b)| frobenius(&(a - b)).powi(2)).sum::<f64>().sqrt();
        x = next;
        if step < opts.convergence_tol {
            return Ok(x);
        }
    }
    Err(QptError::NonConvergence {
        context: "POVM group projection".into(),
        iterations: opts.max_iterations,
        residual: f64::NAN,
    })
}

/// Projected gradient descent with backtracking on a least-squares objective
/// `Σ_j (⟨A_j, X⟩ − q_j)²` over blocks `X`. `grad` maps residuals to the
/// gradient blocks; `project` maps onto the feasible set.
fn projected_gradient(
    start: Vec<ComplexMatrix>,
    residuals: impl Fn(&[ComplexMatrix]) -> Vec<f64>,
    grad: impl Fn(&[f64]) -> Vec<ComplexMatrix>,
    project: impl Fn(Vec<ComplexMatrix>) -> Result<Vec<ComplexMatrix>>,
    lipschitz: f64,
    opts: &ReconstructionOptions,
    context: &str,
) -> Result<Vec<ComplexMatrix>> {
    let objective = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let mut x = project(start)?;
    let mut r = residuals(&x);
    let mut f = objective(&r);
    let mut step = 1.0 / lipschitz;
    for _ in 0..opts.max_iterations {
        let g = grad(&r);
        let (cand, cand_r, cand_f) = loop {
            let moved: Vec<ComplexMatrix> = x.iter().zip(&g).map(|(a, b)| a - b * crate::quantum::matrix::c(step, 0.0)).collect();
            let cand = project(moved)?;
            let cand_r = residuals(&cand);
            let cand_f = objective(&cand_r);
            let lin: f64 = g.iter().zip(cand.iter().zip(&x)).map(|(gb, (cb, xb))| real_inner(gb, &(cb - xb))).sum();
            let quad: f64 = cand.iter().zip(&x).map(|(a, b)| frobenius(&(a - b)).powi(2)).sum();
            if cand_f <= f + lin + quad / (2.0 * step) + 1e-12 * f || step < 1e-12 / lipschitz {
                break (cand, cand_r, cand_f);
            }
            step *= 0.5;
        };
        let change: f64 = cand.iter().zip(&x).map(|(a, b)| frobenius(&(a - b)).powi(2)).sum::<f64>().sqrt();
        x = cand;
        r = cand_r;
        f = cand_f;
        if change < opts.convergence_tol {
            return Ok(x);
        }
        step = (step * 1.5).min(1.0 / lipschitz);
    }
    Err(QptError::NonConvergence { context: context.into(), iterations: opts.max_iterations, residual: f.sqrt() })
}

/// Unconstrained `argmin_X Σ_j (⟨A_j, X⟩ − q_j)²` over Hermitian `X`, via real
/// Pauli coefficients. Used as a warm start.
fn hermitian_lstsq(ops: &[&ComplexMatrix], q: &[f64], n_qubits: usize) -> Result<ComplexMatrix> {
    let basis = crate::quantum::channel::cached_basis(n_qubits)?;
    let n = basis.len();
    let design = nalgebra::DMatrix::from_fn(ops.len(), n, |j, k| real_inner(ops[j], basis.element(k)));
    let rhs = nalgebra::DVector::from_column_slice(q);
    let x = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| QptError::Consistency(e.to_string()))?;
    let coeffs: Vec<num_complex::Complex64> = x.iter().map(|&v| crate::quantum::matrix::c(v, 0.0)).collect();
    Ok(basis.combine(&coeffs))
}

fn lipschitz_bound(ops: &[&ComplexMatrix]) -> f64 {
    2.0 * ops.iter().map(|m| frobenius(m).powi(2)).sum::<f64>()
}

/// Noisy input states `ρ̄_i` implied by an error matrix, measured with ideal
/// effects.
pub fn estimate_states(error_chi: &ProcessMatrix, probes: &ProbeSet, opts: &ReconstructionOptions) -> Result<Vec<QuantumState>> {
    check(error_chi, probes)?;
    let effects: Vec<&ComplexMatrix> = probes.povms.iter().map(|m| m.m()).collect();
    let lip = lipschitz_bound(&effects);
    probes
        .states
        .iter()
        .map(|rho| {
            let out = apply_chi(error_chi, rho.rho());
            let q: Vec<f64> = effects.iter().map(|m| real_inner(m, &out)).collect();
            let start = hermitian_lstsq(&effects, &q, probes.n_qubits)?;
            let fitted = projected_gradient(
                vec![start],
                |x| effects.iter().zip(&q).map(|(m, qv)| real_inner(m, &x[0]) - qv).collect(),
                |r| {
                    let mut g = ComplexMatrix::zeros(out.nrows(), out.ncols());
                    for (m, rv) in effects.iter().zip(r) {
                        g += *m * crate::quantum::matrix::c(2.0 * rv, 0.0);
                    }
                    vec![g]
                },
                |x| Ok(vec![project_density(&x[0])]),
                lip,
                opts,
                "state estimation",
            )?;
            QuantumState::new(probes.n_qubits, fitted.into_iter().next().unwrap())
        })
        .collect()
}

/// Noisy effects `M̄_μ` implied by an error matrix, probed with ideal states.
pub fn estimate_povms(error_chi: &ProcessMatrix, probes: &ProbeSet, opts: &ReconstructionOptions) -> Result<Vec<MeasOperator>> {
    check(error_chi, probes)?;
    let states: Vec<&ComplexMatrix> = probes.states.iter().map(|s| s.rho()).collect();
    let outs: Vec<ComplexMatrix> = states.iter().map(|s| apply_chi(error_chi, s)).collect();
    let lip = lipschitz_bound(&states);
    let k = probes.n_outcomes();
    let mut all = Vec::with_capacity(probes.n_effects());
    for r in 0..probes.n_rotations() {
        let group = probes.group(r);
        // q[b][i] = Tr(M_b χ̃(ρ_i))
        let q: Vec<Vec<f64>> = group.iter().map(|m| outs.iter().map(|o| real_inner(m.m(), o)).collect()).collect();
        let start = q
            .iter()
            .map(|qb| hermitian_lstsq(&states, qb, probes.n_qubits))
            .collect::<Result<Vec<_>>>()?;
        let fitted = projected_gradient(
            start,
            |x| {
                let mut res = Vec::with_capacity(k * states.len());
                for b in 0..k {
                    for (i, s) in states.iter().enumerate() {
                        res.push(real_inner(&x[b], s) - q[b][i]);
                    }
                }
                res
            },
            |res| {
                (0..k)
                    .map(|b| {
                        let mut g = ComplexMatrix::zeros(states[0].nrows(), states[0].ncols());
                        for (i, s) in states.iter().enumerate() {
                            g += *s * crate::quantum::matrix::c(2.0 * res[b * states.len() + i], 0.0);
                        }
                        g
                    })
                    .collect()
            },
            |x| project_povm_group(&x, opts),
            lip,
            opts,
            "POVM estimation",
        )?;
        for (m, ideal) in fitted.into_iter().zip(group) {
            all.push(MeasOperator::new(probes.n_qubits, hermitize(&m), ideal.outcome_label())?);
        }
    }
    Ok(all)
}

fn check(error_chi: &ProcessMatrix, probes: &ProbeSet) -> Result<()> {
    if error_chi.n_qubits() != probes.n_qubits {
        return Err(QptError::Shape(format!(
            "error matrix acts on {} qubit(s), probes on {}",
            error_chi.n_qubits(),
            probes.n_qubits
        )));
    }
    let report = crate::quantum::cptp::cptp_report(error_chi.basis(), error_chi.chi());
    if !report.is_valid(1e-4) {
        return Err(QptError::Validation(format!(
            "error matrix is not CPTP (min eigenvalue {:e}, TP residual {:e})",
            report.min_eigenvalue, report.tp_residual
        )));
    }
    Ok(())
}

/// Ideal probes replaced by those estimated from `error_chi`.
pub fn mitigated_probes(error_chi: &ProcessMatrix, opts: &ReconstructionOptions) -> Result<ProbeSet> {
    let ideal = ideal_probes(error_chi.n_qubits())?;
    let states = estimate_states(error_chi, &ideal, opts)?;
    let povms = estimate_povms(error_chi, &ideal, opts)?;
    ideal.with_probes(states, povms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{build_spam, depolarizing_chi, random_cptp, NoiseSpec};
    use crate::quantum::matrix::{c, hermitian_eigenvalues, trace};
    use crate::seed::rng_from_seed;

    fn opts() -> ReconstructionOptions {
        ReconstructionOptions::default()
    }

    #[test]
    fn identity_error_gives_ideal_probes() {
        for n in 1..=2 {
            let ideal = ideal_probes(n).unwrap();
            let id = ProcessMatrix::identity(n);
            for (a, b) in estimate_states(&id, &ideal, &opts()).unwrap().iter().zip(&ideal.states) {
                assert!(frobenius(&(a.rho() - b.rho())) < 1e-6);
            }
            for (a, b) in estimate_povms(&id, &ideal, &opts()).unwrap().iter().zip(&ideal.povms) {
                assert!(frobenius(&(a.m() - b.m())) < 1e-6);
            }
        }
    }

    #[test]
    fn depolarized_probes() {
        let ideal = ideal_probes(1).unwrap();
        let dep = depolarizing_chi(0.1, 1).unwrap();
        let half = identity(2) * c(0.05, 0.0);
        for (a, b) in estimate_states(&dep, &ideal, &opts()).unwrap().iter().zip(&ideal.states) {
            assert!(frobenius(&(a.rho() - (b.rho() * c(0.9, 0.0) + &half))) < 1e-4);
        }
        for (a, b) in estimate_povms(&dep, &ideal, &opts()).unwrap().iter().zip(&ideal.povms) {
            assert!(frobenius(&(a.m() - (b.m() * c(0.9, 0.0) + &half))) < 1e-4);
        }
    }

    #[test]
    fn constraints_hold_for_random_error_matrices() {
        let mut rng = rng_from_seed(7);
        for n in 1..=2 {
            let ideal = ideal_probes(n).unwrap();
            let err = random_cptp(n, 2, &mut rng).unwrap();
            for s in estimate_states(&err, &ideal, &opts()).unwrap() {
                assert!((trace(s.rho()).re - 1.0).abs() < 1e-9);
                assert!(hermitian_eigenvalues(s.rho())[0] >= -1e-9);
            }
            let effects = estimate_povms(&err, &ideal, &opts()).unwrap();
            let d = 1 << n;
            for group in effects.chunks(d) {
                let sum = group.iter().fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m.m());
                assert!(frobenius(&(sum - identity(d))) < 1e-9);
                for m in group {
                    assert!(hermitian_eigenvalues(m.m())[0] >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn preparation_only_noise_inverted_exactly() {
        let spec = NoiseSpec {
            lambda1: 0.1,
            split: crate::noise::SplitMode::Fixed { lambda_sp: 0.1, lambda_m: 0.0 },
            ..NoiseSpec::noiseless()
        };
        let spam = build_spam(&spec, 1, &mut rng_from_seed(1)).unwrap();
        let ideal = ideal_probes(1).unwrap();
        for (a, b) in estimate_states(&spam.e_sp, &ideal, &opts()).unwrap().iter().zip(&ideal.states) {
            let expect = apply_chi(&spam.e_sp, b.rho());
            assert!(frobenius(&(a.rho() - expect)) < 1e-8);
        }
    }

    #[test]
    fn non_cptp_error_rejected() {
        let mut chi = ProcessMatrix::identity(1).into_chi();
        chi[(0, 0)] = c(2.0, 0.0);
        let bad = ProcessMatrix::new(1, chi).unwrap();
        assert!(estimate_states(&bad, &ideal_probes(1).unwrap(), &opts()).is_err());
    }
}
