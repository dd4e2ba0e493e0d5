use neklab_wasm::{geography_slice_value, smoothing_curve_value, steepness_margin_value};

#[test]
fn smoothing_errors_shrink_with_width() {
    let v = smoothing_curve_value(2.5, 5).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let e0 = |i: usize| rows[i]["errors"][0].as_f64().unwrap();
    assert!(e0(4) < e0(0) / 10.0);
    assert!(smoothing_curve_value(-1.0, 5).is_err());
    assert!(smoothing_curve_value(2.5, 20).is_err());
}

#[test]
fn steepness_kinds() {
    let c = steepness_margin_value("convex3").unwrap();
    assert_eq!(c["kind"], "profile");
    assert_eq!(c["curves"].as_array().unwrap().len(), 2);
    let s = steepness_margin_value("superconductivity").unwrap();
    assert_eq!(s["kind"], "violation");
    assert!(steepness_margin_value("nope").is_err());
}

#[test]
fn slice_labels_are_consistent() {
    let v = geography_slice_value(1e-2, 41).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 41 * 41);
    let lattices = v["lattices"].as_array().unwrap().len();
    let mut seen = [false; 3];
    for c in cells {
        let (m, l) = (c[0].as_u64().unwrap() as usize, c[1].as_u64().unwrap() as usize);
        assert!(m < 3 && l <= lattices);
        assert_eq!(m == 0, l == 0);
        seen[m] = true;
    }
    assert!(seen[0] && seen[1]);
    assert!(geography_slice_value(2.0, 41).is_err());
}
