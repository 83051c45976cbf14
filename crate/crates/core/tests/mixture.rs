use maxcop::mixture::compound_df;
use maxcop::{CopulaFamily, MixingLaw, MixtureCopula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configurations() -> Vec<MixtureCopula> {
    let mut out = Vec::new();
    let bases = [
        CopulaFamily::Independence,
        CopulaFamily::Gumbel { alpha: 2.2758 },
        CopulaFamily::Joe { alpha: 2.3727 },
        CopulaFamily::Frank { alpha: 4.0 },
        CopulaFamily::Clayton { alpha: 1.2 },
        CopulaFamily::Student { rho: 0.5, dof: 6.0 },
    ];
    let laws = [
        MixingLaw::ShiftedGeometric { theta: 0.3254 },
        MixingLaw::ShiftedGeometric { theta: 0.7630 },
        MixingLaw::ShiftedPoisson { theta: 0.1490 },
        MixingLaw::ShiftedPoisson { theta: 0.9537 },
        MixingLaw::TruncatedPoisson { theta: 0.3133 },
        MixingLaw::TruncatedPoisson { theta: 1.8660 },
    ];
    for base in bases {
        for mixing in laws {
            out.push(MixtureCopula::new(base, mixing).unwrap());
        }
    }
    out
}

#[test]
fn closed_form_density_matches_generic_assembly() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for mc in configurations() {
        let points = if matches!(mc.base, CopulaFamily::Student { .. }) { 50 } else { 500 };
        for _ in 0..points {
            let (u1, u2): (f64, f64) = (rng.random_range(0.001..0.999), rng.random_range(0.001..0.999));
            let closed = mc.pdf(u1, u2).unwrap();
            let generic = mc.pdf_generic(u1, u2).unwrap();
            assert!((closed / generic - 1.0).abs() < 1e-8, "{mc:?} at ({u1},{u2}): {closed} vs {generic}");
        }
    }
}

#[test]
fn density_matches_mixed_difference_of_cdf() {
    let h = 1e-4;
    for mc in configurations() {
        if matches!(mc.base, CopulaFamily::Student { .. }) {
            continue;
        }
        let c = |a: f64, b: f64| mc.cdf(a, b).unwrap();
        let (u1, u2) = (0.3, 0.6);
        let fd = (c(u1 + h, u2 + h) - c(u1 + h, u2 - h) - c(u1 - h, u2 + h) + c(u1 - h, u2 - h)) / (4.0 * h * h);
        let pdf = mc.pdf(u1, u2).unwrap();
        assert!((pdf / fd - 1.0).abs() < 1e-4, "{mc:?}: {pdf} vs {fd}");
    }
}

#[test]
fn partial_matches_difference_of_cdf() {
    let h = 1e-6;
    for mc in configurations() {
        for &(u1, u2) in &[(0.2, 0.4), (0.7, 0.3), (0.9, 0.95)] {
            let fd = (mc.cdf(u1, u2 + h).unwrap() - mc.cdf(u1, u2 - h).unwrap()) / (2.0 * h);
            let p = mc.partial_u2(u1, u2).unwrap();
            assert!((p - fd).abs() < 1e-6, "{mc:?}: {p} vs {fd}");
        }
    }
}

#[test]
fn uniform_margins() {
    for mc in configurations() {
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            assert!((mc.cdf(u, 1.0).unwrap() - u).abs() < 1e-10);
            assert!((mc.cdf(1.0, u).unwrap() - u).abs() < 1e-10);
            assert_eq!(mc.cdf(0.0, u).unwrap(), 0.0);
        }
        // margins through the interior formula as well
        for i in 1..20 {
            let u = i as f64 / 20.0;
            let v = mc.mixing.v_transform(u).unwrap();
            assert!((mc.mixing.laplace(-v.ln()).unwrap() - u).abs() < 1e-10);
        }
    }
}

#[test]
fn degenerate_mixing_reduces_to_base() {
    for base in [
        CopulaFamily::Gumbel { alpha: 3.0 },
        CopulaFamily::Joe { alpha: 1.7 },
        CopulaFamily::Clayton { alpha: 2.0 },
    ] {
        for mixing in [MixingLaw::ShiftedGeometric { theta: 1.0 }, MixingLaw::ShiftedPoisson { theta: 0.0 }] {
            let mc = MixtureCopula::new(base, mixing).unwrap();
            for &(a, b) in &[(0.1, 0.2), (0.5, 0.5), (0.8, 0.35)] {
                assert!((mc.cdf(a, b).unwrap() - base.cdf(a, b).unwrap()).abs() < 1e-12);
                assert!((mc.pdf(a, b).unwrap() - base.pdf(a, b).unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn loglik_terms_exponentiate_to_pdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for theta in [0.3, 1.866, 25.0] {
        let mc = MixtureCopula::new(CopulaFamily::Gumbel { alpha: 2.0 }, MixingLaw::TruncatedPoisson { theta }).unwrap();
        for _ in 0..100 {
            let (u1, u2): (f64, f64) = (rng.random_range(0.01..0.99), rng.random_range(0.01..0.99));
            let pdf = mc.pdf_generic(u1, u2).unwrap();
            assert!((mc.loglik_terms(u1, u2).unwrap().exp() - pdf).abs() < 1e-10 * pdf.max(1.0));
        }
    }
}

#[test]
fn fitted_geometric_gumbel_is_finite() {
    let mc = MixtureCopula::new(CopulaFamily::Gumbel { alpha: 2.2758 }, MixingLaw::ShiftedGeometric { theta: 0.763 }).unwrap();
    let l = mc.loglik_terms(0.5, 0.5).unwrap();
    assert!(l.is_finite());
    assert!((l - mc.pdf_generic(0.5, 0.5).unwrap().ln()).abs() < 1e-8);
}

#[test]
fn independence_poisson_symbolic_expansion() {
    // Q = v1 v2 gives W = 1 + 3θ v1 v2 + θ² (v1 v2)²
    let theta = 1.3;
    let law = MixingLaw::ShiftedPoisson { theta };
    let mc = MixtureCopula::new(CopulaFamily::Independence, law).unwrap();
    for &(u1, u2) in &[(0.1, 0.9), (0.4, 0.45), (0.95, 0.05)] {
        let (v1, v2) = (law.v_transform(u1).unwrap(), law.v_transform(u2).unwrap());
        let p = v1 * v2;
        let expected = theta * (p + 1.0 - v1 - v2) - (1.0 + theta * v1).ln() - (1.0 + theta * v2).ln()
            + (1.0 + 3.0 * theta * p + theta * theta * p * p).ln();
        assert!((mc.loglik_terms(u1, u2).unwrap() - expected).abs() < 1e-13);
    }
}

#[test]
fn density_integrates_to_one() {
    for mc in [
        MixtureCopula::new(CopulaFamily::Gumbel { alpha: 2.2758 }, MixingLaw::ShiftedGeometric { theta: 0.763 }).unwrap(),
        MixtureCopula::new(CopulaFamily::Joe { alpha: 2.6634 }, MixingLaw::ShiftedPoisson { theta: 0.9537 }).unwrap(),
        MixtureCopula::new(CopulaFamily::Frank { alpha: 3.0 }, MixingLaw::TruncatedPoisson { theta: 1.866 }).unwrap(),
    ] {
        let n = 400;
        let h = 1.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += mc.pdf((i as f64 + 0.5) * h, (j as f64 + 0.5) * h).unwrap();
            }
        }
        total *= h * h;
        assert!((0.985..=1.015).contains(&total), "{mc:?}: {total}");
    }
}

/// Unit-Fréchet margins `G(x) = exp(−1/x)`.
fn frechet(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

#[test]
fn mixture_df_matches_series() {
    let law = MixingLaw::ShiftedGeometric { theta: 0.4 };
    let base = CopulaFamily::Gumbel { alpha: 1.8 };
    let mc = MixtureCopula::new(base, law).unwrap();
    for &(x, y) in &[(0.5, 2.0), (3.0, 1.0), (10.0, 25.0)] {
        let g = base.cdf(frechet(x), frechet(y)).unwrap();
        let mut series = 0.0;
        let mut k = 1u64;
        loop {
            let term = law.pmf(k) * g.powi(k as i32);
            series += term;
            // the tail beyond k is bounded by P(Λ > k)
            let tail: f64 = 1.0 - (1..=k).map(|j| law.pmf(j)).sum::<f64>();
            if tail < 1e-14 {
                break;
            }
            k += 1;
        }
        let f = mc.mixture_df(frechet, frechet, x, y).unwrap();
        assert!((f - series).abs() < 1e-13, "{f} vs {series}");
    }
    let far = mc.mixture_df(frechet, frechet, 1e12, 1e12).unwrap();
    assert!((far - 1.0).abs() < 1e-10);
}

#[test]
fn correlation_order_bounds() {
    // G^{E[Λ]} ≤ F ≤ G on matched points
    for mc in configurations() {
        for i in 1..10 {
            for j in 1..10 {
                let (a, b) = (i as f64 / 10.0, j as f64 / 10.0);
                let g = mc.base.cdf(a, b).unwrap();
                let f = mc.mixture_df(|x| x, |y| y, a, b).unwrap();
                assert!(f <= g + 1e-15);
                assert!(f >= g.powf(mc.mixing.mean()) - 1e-15);
            }
        }
    }
}

#[test]
fn compound_identity() {
    // F* = E[G^N] with N ~ Poisson(μ): P(N=0) + P(N≥1)·E[G^N | N≥1]
    let mu: f64 = 2.5;
    let p0 = (-mu).exp();
    let law = MixingLaw::TruncatedPoisson { theta: mu };
    for &g in &[0.1, 0.5, 0.93] {
        let direct = (-mu * (1.0 - g)).exp();
        assert!((compound_df(p0, law.laplace(-g.ln()).unwrap()) - direct).abs() < 1e-14);
    }
}

#[test]
fn multivariate_consistency() {
    for mc in [
        MixtureCopula::new(CopulaFamily::Gumbel { alpha: 2.0 }, MixingLaw::ShiftedGeometric { theta: 0.5 }).unwrap(),
        MixtureCopula::new(CopulaFamily::Clayton { alpha: 1.5 }, MixingLaw::ShiftedPoisson { theta: 2.0 }).unwrap(),
        MixtureCopula::new(CopulaFamily::Independence, MixingLaw::TruncatedPoisson { theta: 3.0 }).unwrap(),
    ] {
        for &(a, b) in &[(0.2, 0.7), (0.5, 0.5), (0.99, 0.01)] {
            assert!((mc.cdf_multivariate(&[a, b]).unwrap() - mc.cdf(a, b).unwrap()).abs() < 1e-12);
        }
    }
    let law = MixingLaw::ShiftedPoisson { theta: 1.5 };
    let mc = MixtureCopula::new(CopulaFamily::Independence, law).unwrap();
    let u = 0.4;
    let v = law.v_transform(u).unwrap();
    let expected = law.laplace(-3.0 * v.ln()).unwrap();
    assert!((mc.cdf_multivariate(&[u, u, u]).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn trivariate_gumbel_against_monte_carlo() {
    // conditional on Λ = λ the maxima lie below v with probability Q₃(v)^λ,
    // so averaging that over simulated counts estimates C(u, u, u)
    let law = MixingLaw::ShiftedGeometric { theta: 0.5 };
    let mc = MixtureCopula::new(CopulaFamily::Gumbel { alpha: 2.0 }, law).unwrap();
    let v = law.v_transform(0.5).unwrap();
    let q3 = (-(3.0f64).powf(0.5) * (-v.ln())).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sampler = law.sampler().unwrap();
    let reps = 100_000;
    let draws: Vec<f64> = (0..reps).map(|_| q3.powi(rng.sample(sampler) as i32)).collect();
    let mean = draws.iter().sum::<f64>() / reps as f64;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let exact = mc.cdf_multivariate(&[0.5, 0.5, 0.5]).unwrap();
    assert!((exact - mean).abs() < 3.0 * sd / (reps as f64).sqrt(), "{exact} vs {mean}");
}
