use actionlab_wasm::{generator_curve, square_pulse_table, transmission_sweep};

#[test]
fn standard_pulse_table() {
    let v = square_pulse_table(0.5, std::f64::consts::PI, 1.0, 10).unwrap();
    assert!((v["gamma_sq"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let p: Vec<f64> = v["probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(p.len(), 11);
    assert!((p[0] - (-1.0f64).exp()).abs() < 1e-10);
    assert!((p[3] - (-1.0f64).exp() / 6.0).abs() < 1e-10);
    let pers = v["persistence"].as_array().unwrap();
    let phase = pers[1].as_f64().unwrap().atan2(pers[0].as_f64().unwrap());
    assert!((phase - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
}

#[test]
fn generator_half_turn() {
    let v = generator_curve(1.0, 1.0, 0.0, 3).unwrap();
    let re = v["re"].as_array().unwrap();
    assert!((re[0].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((re[1].as_f64().unwrap() - (-2.0f64).exp()).abs() < 1e-14);
    let hot = generator_curve(1.0, 1.0, 1.0, 3).unwrap();
    assert!(hot["re"][1].as_f64().unwrap() < re[1].as_f64().unwrap());
}

#[test]
fn delta_sweep_is_unitary() {
    let v = transmission_sweep("delta", 1.0, 0.0, 1.0, 0.1, 3.0, 30).unwrap();
    let t = v["transmission"].as_array().unwrap();
    let r = v["reflection"].as_array().unwrap();
    for (a, b) in t.iter().zip(r) {
        assert!((a.as_f64().unwrap() + b.as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
    let half = transmission_sweep("delta", 1.0, 0.0, 1.0, 0.5, 1.0, 2).unwrap();
    assert!((half["transmission"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn bad_inputs() {
    assert!(transmission_sweep("lens", 1.0, 1.0, 1.0, 0.1, 1.0, 10).is_err());
    assert!(transmission_sweep("delta", 1.0, 1.0, 1.0, -0.1, 1.0, 10).is_err());
    assert!(generator_curve(1.0, 1.0, 0.0, 1).is_err());
    assert!(square_pulse_table(0.5, -1.0, 1.0, 10).is_err());
}
