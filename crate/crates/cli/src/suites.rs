//! Suite registry. Each suite maps one domain point to a residual; adding a
//! suite is one table entry.

use std::cell::OnceCell;

use pqk_core::curvature::cc_properties;
use pqk_core::models::Immersion;
use pqk_core::pq_linear::ProlongationSpace;
use pqk_core::submanifold::{self as sub, ClassResiduals, GcrResiduals, RicciCheck, SubmanifoldPointData};
use pqk_core::tolerances::{ALGEBRAIC_LOOSE, FD_SECOND, FLAT_EXACT, GRAPH_SECOND_ORDER};
use pqk_core::{Error, Vector};

/// `Ok(None)` means the suite does not apply at this point.
pub type Eval = fn(&PointCtx) -> Result<Option<f64>, String>;

pub struct Suite {
    pub name: &'static str,
    pub summary: &'static str,
    pub default_tolerance: f64,
    pub eval: Eval,
}

/// Lazily computed data shared by all suites at one point.
pub struct PointCtx<'a> {
    pub imm: &'a Immersion,
    pub u: &'a Vector,
    data: OnceCell<Result<SubmanifoldPointData, String>>,
    classes: OnceCell<Result<ClassResiduals, String>>,
    gcr: OnceCell<Result<GcrResiduals, String>>,
    ricci: OnceCell<Result<Option<RicciCheck>, String>>,
}

impl<'a> PointCtx<'a> {
    pub fn new(imm: &'a Immersion, u: &'a Vector) -> Self {
        Self {
            imm,
            u,
            data: OnceCell::new(),
            classes: OnceCell::new(),
            gcr: OnceCell::new(),
            ricci: OnceCell::new(),
        }
    }

    pub fn data(&self) -> Result<&SubmanifoldPointData, String> {
        self.data.get_or_init(|| sub::point_data(self.imm, self.u).map_err(|e| e.to_string())).as_ref().map_err(Clone::clone)
    }

    pub fn classes(&self) -> Result<ClassResiduals, String> {
        self.classes
            .get_or_init(|| {
                let d = self.data()?;
                sub::class_residuals(self.imm, d).map_err(|e| e.to_string())
            })
            .clone()
    }

    pub fn degenerate_stratum(&self) -> Result<bool, String> {
        sub::degenerate_stratum(self.data()?).map_err(|e| e.to_string())
    }

    fn gcr(&self) -> Result<GcrResiduals, String> {
        self.gcr.get_or_init(|| sub::gcr_residuals(self.imm, self.u).map_err(|e| e.to_string())).clone()
    }

    fn ricci(&self) -> Result<Option<RicciCheck>, String> {
        self.ricci.get_or_init(|| applicable(sub::ricci_check(self.imm, self.u))).clone()
    }
}

/// Maps "not on the maximal stratum" to not-applicable.
fn applicable<T>(r: pqk_core::Result<T>) -> Result<Option<T>, String> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotMaximal { .. }) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

fn some(r: pqk_core::Result<f64>) -> Result<Option<f64>, String> {
    applicable(r)
}

fn shape(ctx: &PointCtx, pick: fn(&sub::ShapeChecks) -> f64) -> Result<Option<f64>, String> {
    Ok(applicable(sub::shape_tensor_checks(ctx.data()?))?.map(|s| pick(&s)))
}

pub static SUITES: &[Suite] = &[
    Suite {
        name: "almost_hermitian",
        summary: "J1 maps the tangent space into itself",
        default_tolerance: FLAT_EXACT,
        eval: |c| Ok(Some(c.classes()?.almost_hermitian)),
    },
    Suite {
        name: "kahler",
        summary: "induced structure is parallel for the induced connection",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.kahler)),
    },
    Suite {
        name: "omega_restricted",
        summary: "omega2 and omega3 vanish on the tangent space",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.omega_restricted)),
    },
    Suite {
        name: "totally_complex",
        summary: "J2 maps the tangent space into the normal space",
        default_tolerance: FLAT_EXACT,
        eval: |c| Ok(Some(c.classes()?.totally_complex)),
    },
    Suite {
        name: "para_quaternionic",
        summary: "J2 maps the tangent space into itself",
        default_tolerance: FLAT_EXACT,
        eval: |c| Ok(Some(c.classes()?.para_quaternionic)),
    },
    Suite {
        name: "totally_geodesic",
        summary: "second fundamental form vanishes",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.second_fundamental)),
    },
    Suite {
        name: "almost_kahler",
        summary: "Kahler form of the induced structure is closed",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.kahler_form_closed)),
    },
    Suite {
        name: "integrable",
        summary: "Nijenhuis tensor of the induced structure vanishes",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.nijenhuis)),
    },
    Suite {
        name: "psi",
        summary: "psi = omega3 o J - omega2 vanishes",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.classes()?.psi)),
    },
    Suite {
        name: "nijenhuis_psi",
        summary: "Nijenhuis tensor equals its reconstruction from psi",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(sub::nijenhuis_psi_residuals(c.imm, c.u).map_err(|e| e.to_string())?.0)),
    },
    Suite {
        name: "wedge",
        summary: "dF against the omega/F wedge combination",
        default_tolerance: FD_SECOND,
        eval: |c| some(sub::kahler_form_wedge_consistency(c.imm, c.u)),
    },
    Suite {
        name: "fundamental",
        summary: "h(X, JY) = h(JX, Y) = J1 h(X, Y)",
        default_tolerance: GRAPH_SECOND_ORDER,
        eval: |c| Ok(Some(sub::fundamental_identity_residual(c.data()?))),
    },
    Suite {
        name: "duality",
        summary: "g(A_xi X, Y) = g(h(X, Y), xi)",
        default_tolerance: GRAPH_SECOND_ORDER,
        eval: |c| Ok(Some(sub::weingarten_duality_residual(c.data()?))),
    },
    Suite {
        name: "shape",
        summary: "algebraic properties of the shape tensor C = J2 h",
        default_tolerance: GRAPH_SECOND_ORDER,
        eval: |c| shape(c, sub::ShapeChecks::max),
    },
    Suite {
        name: "minimal",
        summary: "trace of the second fundamental form vanishes",
        default_tolerance: GRAPH_SECOND_ORDER,
        eval: |c| shape(c, |s| s.minimal),
    },
    Suite {
        name: "shape_anticommute",
        summary: "shape operators anticommute with J",
        default_tolerance: GRAPH_SECOND_ORDER,
        eval: |c| shape(c, |s| s.shape_operators_anticommute),
    },
    Suite {
        name: "cc_properties",
        summary: "[C, C] is a unitary curvature tensor",
        default_tolerance: ALGEBRAIC_LOOSE,
        eval: |c| {
            let d = c.data()?;
            Ok(d.shape.as_ref().map(|s| {
                let space = ProlongationSpace { g: d.frame_metric(), j: d.j.clone(), eps: d.eps };
                cc_properties(&space, s).max()
            }))
        },
    },
    Suite {
        name: "gauss",
        summary: "Gauss equation",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(Some(c.gcr()?.gauss)),
    },
    Suite {
        name: "codazzi",
        summary: "Codazzi equation in shape-tensor form",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(c.gcr()?.codazzi),
    },
    Suite {
        name: "ricci",
        summary: "Ricci equation for the normal curvature",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(c.gcr()?.ricci),
    },
    Suite {
        name: "ricci_general",
        summary: "Ric against Ric(R^TT) plus the C C contraction",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(c.ricci()?.map(|r| r.general)),
    },
    Suite {
        name: "ricci_space_form",
        summary: "Ric against (nu/2)(n+1) g + tr(C_X C_Y)",
        default_tolerance: FD_SECOND,
        eval: |c| Ok(c.ricci()?.map(|r| r.space_form)),
    },
    Suite {
        name: "domega",
        summary: "d omega1 = nu F on the tangent space",
        default_tolerance: FD_SECOND,
        eval: |c| some(sub::domega_residual(c.imm, c.u)),
    },
    Suite {
        name: "normal_block",
        summary: "normal curvature block recovered from the tangential one",
        default_tolerance: FD_SECOND,
        eval: |c| some(sub::normal_block_consistency(c.imm, c.u)),
    },
    Suite {
        name: "parallelism",
        summary: "covariant derivative P of the shape tensor vanishes",
        default_tolerance: FD_SECOND,
        eval: |c| some(sub::parallelism_residual(c.imm, c.u)),
    },
    Suite {
        name: "cc_parallel",
        summary: "[C, C] is parallel",
        default_tolerance: FD_SECOND,
        eval: |c| some(sub::cc_parallel_residual(c.imm, c.u)),
    },
    Suite {
        name: "cubic_line",
        summary: "cubic forms evolve along their line bundle (parallel points only)",
        default_tolerance: FD_SECOND,
        eval: |c| match sub::cubic_line_residual(c.imm, c.u, FD_SECOND) {
            Ok(r) => Ok(r),
            Err(Error::NotMaximal { .. }) => Ok(None),
            Err(e) => Err(e.to_string()),
        },
    },
];

pub fn find(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

pub fn names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}
