use serde::Serialize;

/// Running count of arithmetic performed by an instrumented routine.
/// Shifts are tracked but never folded into `adds`/`muls`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpTally {
    pub adds: u64,
    pub muls: u64,
    pub shifts: u64,
}

impl OpTally {
    /// Additions plus multiplications.
    pub fn arithmetic(&self) -> u64 {
        self.adds + self.muls
    }

    pub fn merge(&mut self, other: OpTally) {
        self.adds += other.adds;
        self.muls += other.muls;
        self.shifts += other.shifts;
    }

    pub(crate) fn bump(&mut self, adds: u64, muls: u64, shifts: u64) {
        self.adds += adds;
        self.muls += muls;
        self.shifts += shifts;
    }
}
