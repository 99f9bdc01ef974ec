//! Qubit channels in Kraus form, channel application on one subsystem, and
//! Choi states.

use crate::error::{check_range, Error, Result};
use crate::qmat::{max_entangled, pauli, ComplexMatrix, DensityOperator};

/// Kraus-completeness tolerance.
pub const KRAUS_TOL: f64 = 1e-10;

/// Which constructor produced a channel, with its defining parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    Identity,
    /// p·id + (1 − p)·σ_z(·)σ_z
    Dephasing { p: f64 },
    AmplitudeDamping { p: f64 },
    /// e^{−αl}(·) + (1 − e^{−αl}) I/2; `transmission` = e^{−αl}.
    Depolarizing { transmission: f64 },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<ComplexMatrix>,
    d_in: usize,
    d_out: usize,
    kind: ChannelKind,
}

impl KrausChannel {
    /// Checks uniform shapes and Σ K†K = I.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::BadShape {
            rows: 0,
            cols: 0,
            len: 0,
        })?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if let Some(bad) = kraus.iter().find(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::DimensionMismatch {
                expected: d_out * d_in,
                actual: bad.rows() * bad.cols(),
            });
        }
        let channel = Self {
            kraus,
            d_in,
            d_out,
            kind: ChannelKind::Custom,
        };
        let dev = channel.completeness_error();
        if dev > KRAUS_TOL {
            return Err(Error::OutOfRange {
                name: "kraus completeness error",
                value: dev,
                domain: "<= 1e-10",
            });
        }
        Ok(channel)
    }

    fn with_kind(kraus: Vec<ComplexMatrix>, kind: ChannelKind) -> Self {
        let d_out = kraus[0].rows();
        let d_in = kraus[0].cols();
        Self {
            kraus,
            d_in,
            d_out,
            kind,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::with_kind(vec![ComplexMatrix::identity(d)], ChannelKind::Identity)
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// max |Σ K†K − I|
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .map(|k| k.adjoint().matmul(k))
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, m| &acc + &m);
        sum.max_abs_diff(&ComplexMatrix::identity(self.d_in))
    }
}

/// Z_p: {√p I, √(1 − p) σ_z}.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
    Ok(KrausChannel::with_kind(
        vec![
            ComplexMatrix::identity(2).scale(p.sqrt()),
            pauli::z().scale((1.0 - p).sqrt()),
        ],
        ChannelKind::Dephasing { p },
    ))
}

/// K₀ = [[1, 0], [0, √(1 − p)]], K₁ = [[0, √p], [0, 0]].
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    check_range("p", p, (0.0..=1.0).contains(&p), "[0, 1]")?;
    let k0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - p).sqrt()])?;
    let k1 = ComplexMatrix::from_real(2, 2, &[0.0, p.sqrt(), 0.0, 0.0])?;
    Ok(KrausChannel::with_kind(
        vec![k0, k1],
        ChannelKind::AmplitudeDamping { p },
    ))
}

/// Depolarizing-with-replacement over a fibre of length `l` with loss rate `alpha`:
/// ρ ↦ e^{−αl} ρ + (1 − e^{−αl}) I/2.
///
/// Realized as {√e·I} ∪ {√((1 − e)/4)·σ_i : σ_i ∈ {I, X, Y, Z}}, since
/// Σ_i σ_i ρ σ_i = 2 Tr[ρ] I.
pub fn depolarizing_length(alpha: f64, l: f64) -> Result<KrausChannel> {
    check_range("alpha", alpha, alpha >= 0.0, ">= 0")?;
    check_range("l", l, l >= 0.0, ">= 0")?;
    depolarizing_transmission((-alpha * l).exp())
}

/// Same channel parameterized directly by the transmission e^{−αl} ∈ [0, 1].
pub fn depolarizing_transmission(transmission: f64) -> Result<KrausChannel> {
    check_range(
        "transmission",
        transmission,
        (0.0..=1.0).contains(&transmission),
        "[0, 1]",
    )?;
    let w = ((1.0 - transmission) / 4.0).sqrt();
    let kraus = vec![
        ComplexMatrix::identity(2).scale(transmission.sqrt()),
        ComplexMatrix::identity(2).scale(w),
        pauli::x().scale(w),
        pauli::y().scale(w),
        pauli::z().scale(w),
    ];
    Ok(KrausChannel::with_kind(
        kraus,
        ChannelKind::Depolarizing { transmission },
    ))
}

/// Σ_i (I ⊗ K_i ⊗ I) ρ (I ⊗ K_i ⊗ I)† with K acting on `subsystem`.
pub fn apply(ch: &KrausChannel, rho: &DensityOperator, subsystem: usize) -> Result<DensityOperator> {
    let dims = rho.dims();
    if subsystem >= dims.len() {
        return Err(Error::SubsystemOutOfRange {
            index: subsystem,
            count: dims.len(),
        });
    }
    if dims[subsystem] != ch.d_in {
        return Err(Error::DimensionMismatch {
            expected: ch.d_in,
            actual: dims[subsystem],
        });
    }
    let left: usize = dims[..subsystem].iter().product();
    let right: usize = dims[subsystem + 1..].iter().product();
    let id_l = ComplexMatrix::identity(left);
    let id_r = ComplexMatrix::identity(right);
    let d_out_total = left * ch.d_out * right;
    let mut out = ComplexMatrix::zeros(d_out_total, d_out_total);
    for k in &ch.kraus {
        let full = id_l.kron(k).kron(&id_r);
        let term = full.matmul(rho.matrix()).matmul(&full.adjoint());
        out = &out + &term;
    }
    let mut out_dims = dims.to_vec();
    out_dims[subsystem] = ch.d_out;
    Ok(DensityOperator::new_unchecked(out.hermitian_part(), out_dims))
}

/// (id ⊗ N)(φ⁺_{d_in}) on dims [d_in, d_out].
pub fn choi(ch: &KrausChannel) -> Result<DensityOperator> {
    let phi = max_entangled(ch.d_in)?.to_density();
    apply(ch, &phi, 1)
}
