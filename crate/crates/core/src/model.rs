//! Physical parameters, Hamiltonians and collapse operators.
//!
//! Frequencies and rates are angular frequencies in rad/µs. The rotating
//! frame co-rotates at half the pump frequency; the squeezed frame is the
//! Bogoliubov-transformed frame in which the bare resonator is a free mode
//! of frequency `Omega_r`.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{fock_ladder, number_operator, pauli_set, HilbertLayout, OperatorMatrix};

/// Circuit-level description of the flux-pumped SQUID resonator.
///
/// Fluxes are in units of the reduced flux quantum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub ej_over_hbar: f64,
    pub phi_ac: f64,
    pub phi_dc: f64,
    pub phi_zpf: f64,
    pub omega_p: f64,
    pub omega_r_bare: f64,
}

/// Result of [`lambda_from_flux`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxDerived {
    pub lambda: f64,
    /// Josephson-shifted resonator frequency.
    pub omega_r_shifted: f64,
    /// Resonator frequency in the frame rotating at half the pump frequency.
    pub omega_r_t: f64,
    /// Set when the AC flux exceeds 0.1 in units of twice the flux quantum,
    /// where the linear expansion of the cosine degrades.
    pub large_drive: bool,
}

pub fn lambda_from_flux(c: &CircuitParams) -> FluxDerived {
    let half_dc = c.phi_dc / 2.0;
    let lambda = c.ej_over_hbar * c.phi_ac * c.phi_zpf.powi(2) * half_dc.sin();
    let omega_r_shifted = c.omega_r_bare + 4.0 * c.phi_zpf.powi(2) * c.ej_over_hbar * half_dc.cos();
    FluxDerived {
        lambda,
        omega_r_shifted,
        omega_r_t: omega_r_shifted - c.omega_p / 2.0,
        large_drive: c.phi_ac.abs() / 2.0 > 0.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Frame {
    Rotating,
    #[default]
    Squeezed,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Rotating => "rotating",
            Frame::Squeezed => "squeezed",
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rotating" | "original" => Ok(Frame::Rotating),
            "squeezed" => Ok(Frame::Squeezed),
            other => Err(Error::InvalidParameter { name: "frame", reason: format!("unknown frame '{other}'") }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_r_t: f64,
    pub omega_s_t: f64,
    pub g: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub n_fock: usize,
    pub frame: Frame,
}

impl Default for ModelParams {
    /// ω̃r = 1, ω̃s = 0.6, g = 0.005, κ = 0.04, no squeezing, squeezed frame with N = 30.
    fn default() -> Self {
        Self { omega_r_t: 1.0, omega_s_t: 0.6, g: 0.005, lambda: 0.0, kappa: 0.04, n_fock: 30, frame: Frame::Squeezed }
    }
}

impl ModelParams {
    /// Set the drive through the squeezing parameter, `lambda = omega_r tanh(2r)`.
    pub fn with_r(mut self, r: f64) -> Self {
        self.lambda = self.omega_r_t * (2.0 * r).tanh();
        self
    }

    pub fn with_frame(mut self, frame: Frame, n_fock: usize) -> Self {
        self.frame = frame;
        self.n_fock = n_fock;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_r_t, self.omega_s_t, self.g, self.lambda, self.kappa].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter { name: "params", reason: "non-finite value".into() });
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidTruncation(self.n_fock));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be positive, got {}", self.kappa) });
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter { name: "g", reason: format!("must be non-negative, got {}", self.g) });
        }
        if self.lambda.abs() >= self.omega_r_t {
            return Err(Error::ParametricInstability { lambda: self.lambda.abs(), omega_r: self.omega_r_t });
        }
        Ok(())
    }

    pub fn squeezed(&self) -> Result<SqueezedFrameParams> {
        squeezed_frame_params(self)
    }

    /// Spin-plus-resonator layout with this truncation.
    pub fn layout(&self) -> Result<HilbertLayout> {
        HilbertLayout::new(self.n_fock)
    }

    /// Resonator-only layout with this truncation.
    pub fn resonator_layout(&self) -> Result<HilbertLayout> {
        HilbertLayout::resonator_only(self.n_fock)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedFrameParams {
    pub r: f64,
    pub omega_r: f64,
}

pub fn squeezed_frame_params(p: &ModelParams) -> Result<SqueezedFrameParams> {
    if !(p.lambda.abs() < p.omega_r_t) {
        return Err(Error::ParametricInstability { lambda: p.lambda.abs(), omega_r: p.omega_r_t });
    }
    let r = 0.5 * (p.lambda / p.omega_r_t).atanh();
    Ok(SqueezedFrameParams { r, omega_r: p.omega_r_t / (2.0 * r).cosh() })
}

/// Environment seen by the resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum BathSpec {
    #[default]
    Vacuum,
    Thermal { n_bar: f64 },
    CoherentDrive { alpha: c64 },
    /// Decay of the squeezed-frame mode itself, `sqrt(kappa) gamma`.
    SqueezedVacuumReference,
}

impl BathSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BathSpec::Vacuum => "vacuum",
            BathSpec::Thermal { .. } => "thermal",
            BathSpec::CoherentDrive { .. } => "coherent",
            BathSpec::SqueezedVacuumReference => "squeezed_reference",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BathSpec::Thermal { n_bar } if !(n_bar >= 0.0) => {
                Err(Error::InvalidParameter { name: "bath.nbar", reason: format!("must be >= 0, got {n_bar}") })
            }
            _ => Ok(()),
        }
    }
}

fn check_layout(p: &ModelParams, layout: &HilbertLayout) -> Result<()> {
    p.validate()?;
    if layout.n_fock != p.n_fock {
        return Err(Error::DimensionMismatch { expected: p.n_fock, got: layout.n_fock });
    }
    if !layout.has_spin() && p.g != 0.0 {
        return Err(Error::Unsupported("resonator-only layout requires g = 0".into()));
    }
    Ok(())
}

/// Resonator annihilation operator `a` expressed in the frame's basis.
///
/// In the squeezed frame the elementary ladder matrix is `gamma`, so
/// `a = gamma cosh r + gamma^dag sinh r`.
pub fn resonator_annihilation(p: &ModelParams, layout: &HilbertLayout) -> Result<OperatorMatrix> {
    check_layout(p, layout)?;
    let (l, ld) = fock_ladder(p.n_fock)?;
    let a = match p.frame {
        Frame::Rotating => l,
        Frame::Squeezed => {
            let r = squeezed_frame_params(p)?.r;
            (&l * r.cosh()) + (&ld * r.sinh())
        }
    };
    Ok(layout.embed_resonator(&a.with_label("a")))
}

/// Photon number `a^dag a` in the frame's basis.
pub fn photon_number(p: &ModelParams, layout: &HilbertLayout) -> Result<OperatorMatrix> {
    let op = match p.frame {
        Frame::Rotating => {
            check_layout(p, layout)?;
            layout.embed_resonator(&number_operator(p.n_fock)?)
        }
        Frame::Squeezed => {
            let a = resonator_annihilation(p, layout)?;
            &a.adjoint() * &a
        }
    };
    Ok(op.with_label("n"))
}

/// `sigma_x` on the composite space.
pub fn spin_sx(layout: &HilbertLayout) -> Result<OperatorMatrix> {
    layout.embed_spin(&pauli_set().sx)
}

pub fn build_hamiltonian(p: &ModelParams, layout: &HilbertLayout) -> Result<OperatorMatrix> {
    check_layout(p, layout)?;
    let (a, ad) = fock_ladder(p.n_fock)?;
    let num = number_operator(p.n_fock)?;
    let pauli = pauli_set();

    let h = match p.frame {
        Frame::Rotating => {
            let pair = (&a * &a) + (&ad * &ad);
            let res = (&num * p.omega_r_t) - (&pair * (0.5 * p.lambda));
            let mut h = layout.embed_resonator(&res);
            if layout.has_spin() {
                h = &h + &layout.embed_spin(&(&pauli.sz * (0.5 * p.omega_s_t)))?;
                let coupling = layout.product(&a, &pauli.sp)? + layout.product(&ad, &pauli.sm)?;
                h = &h + &(&coupling * p.g);
            }
            h
        }
        Frame::Squeezed => {
            let sq = squeezed_frame_params(p)?;
            let mut h = layout.embed_resonator(&(&num * sq.omega_r));
            if layout.has_spin() {
                h = &h + &layout.embed_spin(&(&pauli.sz * (0.5 * p.omega_s_t)))?;
                let x = &a + &ad;
                let y = &ad - &a;
                let sy = &pauli.sp - &pauli.sm;
                let even = &layout.product(&x, &pauli.sx)? * (0.5 * p.g * sq.r.exp());
                let odd = &layout.product(&y, &sy)? * (0.5 * p.g * (-sq.r).exp());
                h = &h + &(&even - &odd);
            }
            h
        }
    };
    Ok(h.with_label("H"))
}

/// Collapse operators, each scaled so that `L^dag L` is a rate.
pub fn build_collapse(p: &ModelParams, bath: &BathSpec, layout: &HilbertLayout) -> Result<Vec<OperatorMatrix>> {
    check_layout(p, layout)?;
    bath.validate()?;
    let sk = p.kappa.sqrt();
    let ops = match *bath {
        BathSpec::Vacuum => vec![(&resonator_annihilation(p, layout)? * sk).with_label("L")],
        BathSpec::Thermal { n_bar } => {
            let a = resonator_annihilation(p, layout)?;
            vec![
                (&a * (p.kappa * (n_bar + 1.0)).sqrt()).with_label("L1"),
                (&a.adjoint() * (p.kappa * n_bar).sqrt()).with_label("L2"),
            ]
        }
        BathSpec::CoherentDrive { alpha } => {
            if p.frame != Frame::Rotating {
                return Err(Error::Unsupported("coherent drive is built in the displaced rotating frame".into()));
            }
            let a = resonator_annihilation(p, layout)?;
            let shift = OperatorMatrix::identity(layout.dim()).scale(alpha);
            vec![(&(&a - &shift) * sk).with_label("L")]
        }
        BathSpec::SqueezedVacuumReference => {
            if p.frame != Frame::Squeezed {
                return Err(Error::Unsupported("the squeezed-vacuum reference bath needs the squeezed frame".into()));
            }
            let (g, _) = fock_ladder(p.n_fock)?;
            vec![(&layout.embed_resonator(&g) * sk).with_label("L'")]
        }
    };
    Ok(ops.into_iter().filter(|l| !l.is_zero()).collect())
}

/// Hamiltonian and collapse list for a bath; the coherent-drive construction
/// works in the displaced frame where the Hamiltonian vanishes.
pub fn build_system(
    p: &ModelParams,
    bath: &BathSpec,
    layout: &HilbertLayout,
) -> Result<(OperatorMatrix, Vec<OperatorMatrix>)> {
    let ls = build_collapse(p, bath, layout)?;
    let h = match bath {
        BathSpec::CoherentDrive { .. } => OperatorMatrix::zeros(layout.dim(), "H"),
        _ => build_hamiltonian(p, layout)?,
    };
    Ok((h, ls))
}
