mod common;

#[test]
fn vacuum_pulse_travels_at_light_speed() {
    let speed = common::pulse_speed();
    println!("pulse speed {speed:.5}");
    assert!((speed - 1.0).abs() < 0.01, "speed {speed}");
}

#[test]
fn closed_box_conserves_energy() {
    let drift = common::closed_box_drift();
    assert!(drift < 1e-6, "relative drift {drift:e}");
}

#[test]
fn absorber_reflection_below_minus_40_db() {
    let db = common::absorber_reflection_db();
    println!("reflection {db:.1} dB");
    assert!(db < -40.0, "reflection {db:.1} dB");
}

#[test]
fn mirror_symmetric_evolution_keeps_parity() {
    let leak = common::parity_leakage();
    assert!(leak < 1e-10, "leakage {leak:e}");
}

#[test]
fn mirrored_half_grid_matches_full_grid() {
    let (field, energy) = common::half_grid_mismatch();
    assert!(field < 1e-12, "max relative difference {field:e}");
    assert!(energy < 1e-3, "energy mismatch {energy:e}");
}

#[test]
fn synthetic_ringdowns_give_q_within_one_percent() {
    let err = common::q_extraction_error();
    println!("worst Q error {:.3}%", 100.0 * err);
    assert!(err < 0.01);
}
