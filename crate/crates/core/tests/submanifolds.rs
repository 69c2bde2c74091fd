use std::sync::Arc;

use pqk_core::chart::{MetricField, QuaternionicField};
use pqk_core::curvature::cc_properties;
use pqk_core::linalg::{self, max_abs};
use pqk_core::models::*;
use pqk_core::pq_linear::{make_standard_basis, ProlongationSpace};
use pqk_core::sampling::{ball_points, random_vector, rng, DEFAULT_SEED};
use pqk_core::submanifold::*;
use pqk_core::{Eps, Error, Mat, Vector};

fn pts(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
    ball_points(dim, count, radius, seed).into_iter().map(Vector::from_vec).collect()
}

fn graph_terms() -> Vec<PotentialTerm> {
    vec![
        PotentialTerm { coeff: (0.2, 0.1), powers: vec![3, 0] },
        PotentialTerm { coeff: (0.1, -0.15), powers: vec![1, 2] },
    ]
}

fn graph(eps: Eps, terms: Vec<PotentialTerm>) -> (Immersion, Vec<Vector>) {
    let chart = Arc::new(flat_space(2, eps).unwrap());
    let probe = pts(4, 5, 0.3, DEFAULT_SEED);
    (embed_graph(terms, chart, &probe).unwrap().immersion, probe)
}

/// Second fundamental form of a map that is quadratic in `u`, from exact
/// unit-step central differences and an explicit normal projection.
fn h_oracle(imm: &Immersion, u: &Vector) -> Vec<Vector> {
    let m = imm.domain_dim;
    let f = |v: &Vector| imm.map(v).unwrap();
    let e = |i: usize| {
        let mut v = Vector::zeros(m);
        v[i] = 1.0;
        v
    };
    let d = Mat::from_columns(&(0..m).map(|i| (f(&(u + e(i))) - f(&(u - e(i)))) * 0.5).collect::<Vec<_>>());
    let g = imm.chart.metric(&imm.map(u).unwrap()).unwrap();
    let gram = d.transpose() * &g * &d;
    let proj = Mat::identity(d.nrows(), d.nrows()) - &d * gram.try_inverse().unwrap() * d.transpose() * &g;
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let (a, b) = (e(i), e(j));
            let second = (f(&(u + &a + &b)) - f(&(u + &a - &b)) - f(&(u - &a + &b)) + f(&(u - &a - &b))) * 0.25;
            out.push(&proj * second);
        }
    }
    out
}

#[test]
fn flat_slices_are_kahler_totally_complex_and_geodesic() {
    let tol = ClassifyTolerances::default();
    for n in 1..=2 {
        for eps in Eps::ALL {
            let chart = Arc::new(flat_space(n, eps).unwrap());
            for k in 1..=n {
                let imm = embed_epsilon_complex_slice(k, chart.clone()).unwrap();
                let c = classify(&imm, &imm.sample_points(4, 0.3, 1), &tol).unwrap();
                let w = &c.worst;
                for v in [w.kahler, w.omega_restricted, w.totally_complex, w.second_fundamental, w.nijenhuis, w.psi] {
                    assert!(v <= 1e-6, "{w:?}");
                }
                assert_eq!(c.verdict.kahler, Some(true));
                assert_eq!(c.verdict.totally_complex, Some(true));
                assert_eq!(c.verdict.totally_geodesic, Some(true));
                assert_eq!(c.verdict.para_quaternionic, Some(false));
                assert!(!c.exclusivity_violation);
            }
            let imm = embed_epsilon_complex_slice(n, chart).unwrap();
            let u = &imm.sample_points(1, 0.3, 2)[0];
            let g = gcr_residuals(&imm, u).unwrap();
            assert!(g.max() <= 1e-6);
            let r = ricci_check(&imm, u).unwrap();
            assert!(r.general.max(r.space_form) <= 1e-6);
            assert!(domega_residual(&imm, u).unwrap() <= 1e-6);
            let d = point_data(&imm, u).unwrap();
            assert_eq!(d.normal_mode, NormalMode::J2);
            assert!(shape_tensor_checks(&d).unwrap().max() <= 1e-6);
            assert!(cubic_forms(&d).unwrap().plus.max_abs() <= 1e-6);
        }
    }
}

#[test]
fn pq_slices_are_para_quaternionic() {
    let tol = ClassifyTolerances::default();
    for eps in Eps::ALL {
        for (chart, h_tol) in [
            (Arc::new(flat_space(2, eps).unwrap()), 1e-6),
            (Arc::new(projective_chart(2, eps, 1.0).unwrap()), 1e-4),
        ] {
            let imm = embed_pq_slice(1, chart).unwrap();
            let points = imm.sample_points(3, 0.3, 4);
            let c = classify(&imm, &points, &tol).unwrap();
            assert!(c.worst.para_quaternionic <= 1e-8);
            assert!(c.worst.second_fundamental <= h_tol);
            assert_eq!(c.verdict.para_quaternionic, Some(true));
            assert_eq!(c.verdict.totally_complex, Some(false));
            assert!(!c.exclusivity_violation);
            let d = point_data(&imm, &points[0]).unwrap();
            assert_eq!(d.normal_mode, NormalMode::Complement);
            assert_eq!(d.normal.ncols(), 4);
            assert!(fundamental_identity_residual(&d) <= h_tol);
            assert!(matches!(shape_tensor_checks(&d), Err(Error::NotMaximal { .. })));
        }
    }
}

#[test]
fn projective_slices_are_kahler_with_space_form_ricci() {
    let tol = ClassifyTolerances::default();
    for n in 1..=2 {
        for eps in Eps::ALL {
            for scale in [1.0, -1.0] {
                let chart = Arc::new(projective_chart(n, eps, scale).unwrap());
                let nu = chart.nu();
                let imm = embed_epsilon_complex_slice(n, chart).unwrap();
                let points = imm.sample_points(3, 0.3, 5);
                let c = classify(&imm, &points, &tol).unwrap();
                let w = &c.worst;
                assert!(w.kahler.max(w.omega_restricted).max(w.totally_complex) <= 1e-3, "{w:?}");
                assert!(w.psi <= 1e-4);
                assert!(w.second_fundamental <= 1e-4);
                assert_eq!(c.verdict.kahler, Some(true));
                assert_eq!(c.verdict.omega_restricted, Some(true));
                assert_eq!(c.verdict.totally_complex, Some(true));
                assert_eq!(c.verdict.para_quaternionic, Some(false));
                assert!(!c.exclusivity_violation);
                for u in &points {
                    let r = ricci_check(&imm, u).unwrap();
                    assert!(r.space_form <= 1e-3 * nu.abs(), "ν = {nu}: {r:?}");
                    assert!(domega_residual(&imm, u).unwrap() <= 1e-3);
                    assert!(normal_block_consistency(&imm, u).unwrap() <= 1e-3);
                    let g = gcr_residuals(&imm, u).unwrap();
                    assert!(g.codazzi.unwrap() <= 1e-3 && g.gauss <= 1e-3 && g.ricci.unwrap() <= 1e-3, "{g:?}");
                    assert!(parallelism_residual(&imm, u).unwrap() <= 1e-3);
                }
            }
        }
    }
}

#[test]
fn domega_tracks_the_kahler_form() {
    // dω is nonzero on a curved slice and equals νF there.
    let chart = Arc::new(projective_chart(1, Eps::Complex, 1.0).unwrap());
    let imm = embed_epsilon_complex_slice(1, chart.clone()).unwrap();
    let u = Vector::from_vec(vec![0.1, -0.2]);
    let d = point_data(&imm, &u).unwrap();
    assert!(max_abs(&d.kahler) > 0.5);
    assert!(domega_residual(&imm, &u).unwrap() < 1e-6);
}

#[test]
fn graph_second_fundamental_form_matches_oracle() {
    for eps in Eps::ALL {
        let (imm, probe) = graph(eps, graph_terms());
        for u in &probe {
            let engine = second_fundamental_domain(&imm, u).unwrap();
            let oracle = h_oracle(&imm, u);
            let scale = oracle.iter().map(|v| v.amax()).fold(0.0, f64::max);
            assert!(scale > 0.1);
            for (a, b) in engine.iter().zip(&oracle) {
                assert!((a - b).amax() <= 1e-6 * scale.max(1.0));
            }
            let d = point_data(&imm, u).unwrap();
            assert!(d.h_norm() > 0.1);
        }
    }
}

#[test]
fn graph_family_identities() {
    for eps in Eps::ALL {
        let (imm, probe) = graph(eps, graph_terms());
        let c = classify(&imm, &probe, &ClassifyTolerances::default()).unwrap();
        assert_eq!(c.verdict.kahler, Some(true));
        assert_eq!(c.verdict.totally_complex, Some(true));
        assert_eq!(c.verdict.totally_geodesic, Some(false));
        for u in &probe {
            let d = point_data(&imm, u).unwrap();
            assert!(fundamental_identity_residual(&d) <= 1e-5);
            let s = shape_tensor_checks(&d).unwrap();
            assert!(s.max() <= 1e-5, "{s:?}");
            assert!(weingarten_duality_residual(&d) <= 1e-6, "{eps} {:e} h {:e}", weingarten_duality_residual(&d), d.h_norm());
            let g = gcr_residuals(&imm, u).unwrap();
            assert!(g.gauss <= 1e-3);
            assert!(g.codazzi.unwrap() <= 1e-3);
            assert!(g.ricci.unwrap() <= 10.0 * 1e-3);
            assert!(ricci_check(&imm, u).unwrap().general <= 1e-3);
            let space = ProlongationSpace { g: d.frame_metric(), j: d.j.clone(), eps };
            let cc = cc_properties(&space, d.shape.as_ref().unwrap());
            assert!(cc.max() <= 1e-9, "{cc:?}");
            let pair = cubic_forms(&d).unwrap();
            assert!(pair.mixed <= 1e-6);
            assert!(pair.plus.max_abs() > 1e-3);
            // Not parallel, so the cubic-line residual does not apply.
            assert!(parallelism_residual(&imm, u).unwrap() > 1e-2);
            assert_eq!(cubic_line_residual(&imm, u, 1e-3).unwrap(), None);
        }
    }
}

#[test]
fn affine_and_zero_graphs_are_flat() {
    for eps in Eps::ALL {
        // Quadratic potential: w is linear.
        let (imm, probe) = graph(eps, vec![PotentialTerm { coeff: (0.4, 0.3), powers: vec![1, 1] }]);
        for u in &probe {
            assert!(point_data(&imm, u).unwrap().h_norm() <= 1e-6);
        }
        let (zero, probe) = graph(eps, vec![]);
        let slice = embed_epsilon_complex_slice(2, zero.chart.clone()).unwrap();
        for u in &probe {
            assert!((zero.map(u).unwrap() - slice.map(u).unwrap()).amax() < 1e-15);
            assert!(point_data(&zero, u).unwrap().h_norm() <= 1e-12);
        }
    }
}

#[test]
fn nijenhuis_matches_psi_reconstruction() {
    for eps in Eps::ALL {
        let chart = Arc::new(twisted_flat_space(1, eps, 0.8).unwrap());
        let imm = embed_pq_slice(1, chart).unwrap();
        for u in imm.sample_points(5, 0.3, 6) {
            let (unit, half) = nijenhuis_psi_residuals(&imm, &u).unwrap();
            assert!(unit <= 1e-3);
            assert!(half > 0.1, "the ½ normalisation should not match");
            let n = nijenhuis(&imm, &u).unwrap();
            assert!(n.iter().map(|v| v.amax()).fold(0.0, f64::max) > 0.1);
            assert!(psi_form(&imm, &u).unwrap().amax() > 0.1);
        }
        let c = classify(&imm, &imm.sample_points(3, 0.3, 6), &ClassifyTolerances::default()).unwrap();
        assert_eq!(c.verdict.integrable, Some(false));
        assert_eq!(c.verdict.para_quaternionic, Some(true));
    }
}

#[test]
fn psi_vanishes_on_hermitian_instances() {
    let tol = ClassifyTolerances::default();
    for eps in Eps::ALL {
        let proj = Arc::new(projective_chart(2, eps, 1.0).unwrap());
        let flat = Arc::new(flat_space(2, eps).unwrap());
        let mut corpus = vec![
            embed_epsilon_complex_slice(2, proj.clone()).unwrap(),
            embed_epsilon_complex_slice(1, proj.clone()).unwrap(),
            embed_pq_slice(1, proj).unwrap(),
            embed_epsilon_complex_slice(2, flat.clone()).unwrap(),
            embed_pq_slice(2, flat).unwrap(),
        ];
        corpus.push(graph(eps, graph_terms()).0);
        for imm in &corpus {
            let points = imm.sample_points(2, 0.3, 8);
            let c = classify(imm, &points, &tol).unwrap();
            assert_eq!(c.verdict.integrable, Some(true));
            assert!(c.worst.psi <= 1e-4, "{:?}", c.worst);
            for u in &points {
                assert!(nijenhuis_psi_residuals(imm, u).unwrap().0 <= 1e-3);
            }
        }
    }
}

#[test]
fn wedge_residual_covanishes_with_df() {
    for eps in Eps::ALL {
        let proj = Arc::new(projective_chart(1, eps, 1.0).unwrap());
        let tw = Arc::new(twisted_flat_space(1, eps, 0.8).unwrap());
        let corpus = [
            (embed_epsilon_complex_slice(1, proj.clone()).unwrap(), true),
            (embed_pq_slice(1, proj).unwrap(), false),
            (embed_pq_slice(1, tw).unwrap(), false),
            (graph(eps, graph_terms()).0, true),
        ];
        for (imm, closed) in &corpus {
            for u in imm.sample_points(2, 0.3, 9) {
                let d = point_data(imm, &u).unwrap();
                let wedge = almost_kahler_wedge_residual(&d);
                let df = class_residuals(imm, &d).unwrap().kahler_form_closed;
                assert_eq!(wedge <= 1e-6, df <= 1e-6, "wedge {wedge:e} dF {df:e}");
                assert_eq!(df <= 1e-6, *closed);
                assert!(kahler_form_wedge_consistency(imm, &u).unwrap() <= 1e-6);
            }
        }
    }
}

#[test]
fn opposite_sign_wedge_form_misses_df_on_pq_slices() {
    for eps in Eps::ALL {
        let imm = embed_pq_slice(1, Arc::new(projective_chart(1, eps, 1.0).unwrap())).unwrap();
        let d = point_data(&imm, &Vector::from_vec(vec![0.2, -0.1, 0.05, 0.1])).unwrap();
        let f = restricted_kahler_forms(&d);
        let opposite = wedge_identity_opposite_residual(&f[1], &d.omega[2], &f[2], &d.omega[1], eps);
        assert!(opposite <= 1e-10);
        assert!(almost_kahler_wedge_residual(&d) > 0.1);
    }
}

#[test]
fn synthetic_wedge_data() {
    let mut r = rng(13);
    for eps in Eps::ALL {
        let (sp, b) = make_standard_basis(1, eps).unwrap();
        let f: Vec<Mat> = (0..3).map(|a| b.j[a].transpose() * &sp.g).collect();
        let j = &b.j[0];
        for _ in 0..20 {
            let w2 = random_vector(&mut r, 4);
            // ω₃ = εω₂∘𝒥 gives ψ = 0 and satisfies the opposite-sign form.
            let w3 = j.transpose() * &w2 * eps.value();
            let psi = j.transpose() * &w3 - &w2;
            assert!(psi.amax() <= 1e-12);
            assert!(wedge_identity_opposite_residual(&f[1], &w3, &f[2], &w2, eps) <= 1e-10);
            // ω₃ = −εω₂∘𝒥 is the solution of the dF-consistent form.
            let w3 = -w3;
            assert!(wedge_identity_residual(&f[1], &w3, &f[2], &w2, eps) <= 1e-10);
        }
        let zero = Vector::zeros(4);
        assert_eq!(wedge_identity_residual(&f[1], &zero, &f[2], &zero, eps), 0.0);
    }
}

#[test]
fn geometric_cubic_forms_transform_like_synthetic_ones() {
    for eps in Eps::ALL {
        let (imm, probe) = graph(eps, graph_terms());
        let d = point_data(&imm, &probe[0]).unwrap();
        let space = ProlongationSpace { g: d.frame_metric(), j: d.j.clone(), eps };
        let c = d.shape.clone().unwrap();
        for theta in [-0.7, 0.2, 1.1] {
            assert!(space.transform_residual(&c, theta).unwrap() <= 1e-8 * c.max_abs());
        }
    }
}

#[test]
fn cc_tensor_is_not_parallel_on_the_graph() {
    for eps in Eps::ALL {
        let (imm, probe) = graph(eps, graph_terms());
        assert!(cc_parallel_residual(&imm, &probe[0]).unwrap() > 1e-2);
    }
    let slice = embed_epsilon_complex_slice(1, Arc::new(projective_chart(1, Eps::Complex, 1.0).unwrap())).unwrap();
    assert!(cc_parallel_residual(&slice, &Vector::from_vec(vec![0.1, 0.1])).unwrap() <= 1e-3);
}

#[test]
fn degenerate_tangent_space_reports_witness() {
    // The plane spanned by e0 + e2 and e1 + e3 is totally null in ℍ̃¹.
    let chart = Arc::new(flat_space(1, Eps::Complex).unwrap());
    let imm = embed_pq_slice(1, chart).unwrap();
    let w = Mat::from_columns(&[
        Vector::from_vec(vec![1.0, 0.0, 1.0, 0.0]),
        Vector::from_vec(vec![0.0, 1.0, 0.0, 1.0]),
    ]);
    let g = imm.chart.metric(&Vector::zeros(4)).unwrap();
    match pqk_core::pq_linear::pseudo_orthonormalize(&w, &g) {
        Err(Error::DegenerateSubspace { witness, .. }) => {
            let v = Vector::from_vec(witness);
            assert!(linalg::inner(&g, &v, &v).abs() < 1e-12);
        }
        other => panic!("expected a degenerate subspace, got {other:?}"),
    }
}

#[test]
fn j_fields_are_compatible_along_immersions() {
    let chart = Arc::new(projective_chart(2, Eps::ParaComplex, 1.0).unwrap());
    let imm = embed_epsilon_complex_slice(2, chart.clone()).unwrap();
    let u = Vector::from_vec(vec![0.1, 0.05, -0.1, 0.2]);
    let d = point_data(&imm, &u).unwrap();
    let j = chart.j_fields(&d.x).unwrap();
    assert!(max_abs(&(&j[0] * &d.tangent - &d.tangent * &d.j)) < 1e-12);
    let sq = &d.j * &d.j - Mat::identity(4, 4);
    assert!(max_abs(&sq) < 1e-12);
}

#[test]
fn no_valid_points_is_an_error() {
    let chart = Arc::new(projective_chart(1, Eps::ParaComplex, 1.0).unwrap());
    let imm = embed_epsilon_complex_slice(1, chart).unwrap();
    // λ = 1 + a² − b² vanishes at (0, 1) on the ε = +1 slice.
    let bad = vec![Vector::from_vec(vec![0.0, 1.0])];
    assert!(matches!(classify(&imm, &bad, &ClassifyTolerances::default()), Err(Error::NoValidPoints)));
}
