//! dB conversions.

/// Finite stand-in for a perfect null when a dB value has to be stored.
pub const NULL_FLOOR_DB: f64 = -400.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `-inf` for a zero input.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// dBm to milliwatts.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for db in [-30.0, -3.0, 0.0, 8.0, 18.06] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
    }
}
