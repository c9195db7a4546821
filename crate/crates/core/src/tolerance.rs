/// Shared numerical thresholds.
///
/// Every routine that branches on "zero", "real", "equal" or "aligned" reads
/// its threshold from here so that the spectrum, resonance and dynamics
/// modules agree on where region boundaries lie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// A root `chi` is real when `|Im chi| <= root_real * max(1, |chi|)`.
    pub root_real: f64,
    /// A real root is negative when `Re chi < -root_negative * max(1, |chi|)`.
    pub root_negative: f64,
    /// Relative equality used for degeneracy tests (merged resonances,
    /// equal trap frequencies, collapsed instability windows).
    pub relative: f64,
    /// Allowed deviation of an axis from unit length.
    pub unit_vector: f64,
    /// Allowed relative asymmetry of the potential matrix.
    pub symmetry: f64,
    /// `|n . e| >= 1 - axis_alignment` counts as rotation about principal axis `e`.
    pub axis_alignment: f64,
    /// Relative width to which scan boundaries are bisected.
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_real: 1e-7,
            root_negative: 1e-7,
            relative: 1e-9,
            unit_vector: 1e-12,
            symmetry: 1e-12,
            axis_alignment: 1e-9,
            boundary: 1e-10,
        }
    }
}
