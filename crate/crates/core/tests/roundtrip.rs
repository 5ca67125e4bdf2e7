use std::io::Cursor;

use mpgfrft::crypto::{decrypt_image, encrypt_image, read_ciphertext, write_ciphertext, CipherKey};
use mpgfrft::imaging::{random_rgb, synthetic_rgb};
use mpgfrft::io::{
    load_graph, load_image, load_signal_csv, orders_from_json, orders_to_json, parse_signal_csv, save_graph_csv,
    save_image, save_signal_csv, write_signal_csv,
};
use mpgfrft::graph::build_random_sensor_graph;
use mpgfrft::spectral::{OrderVector, TransformKind};
use mpgfrft::Error;
use nalgebra::DMatrix;
use tempfile::TempDir;

#[test]
fn ciphertext_file_round_trip_decrypts() {
    let img = synthetic_rgb(12, 10);
    for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
        let key = CipherKey::generate(kind, 16, 3).unwrap();
        let ct = encrypt_image(&img, &key).unwrap();
        let mut bytes = Vec::new();
        write_ciphertext(&ct, &mut bytes).unwrap();
        let back = read_ciphertext(Cursor::new(&bytes), key.group_size).unwrap();
        assert_eq!(back.groups, ct.groups);
        assert_eq!(decrypt_image(&back, &key).unwrap(), img);
    }
}

#[test]
fn truncated_ciphertext_is_rejected() {
    let key = CipherKey::generate(TransformKind::MpgfrftI, 16, 1).unwrap();
    let ct = encrypt_image(&random_rgb(4, 4, 2), &key).unwrap();
    let mut bytes = Vec::new();
    write_ciphertext(&ct, &mut bytes).unwrap();
    bytes.truncate(bytes.len() - 5);
    assert!(matches!(read_ciphertext(Cursor::new(&bytes), 16), Err(Error::MalformedCiphertext(_))));
    assert!(read_ciphertext(Cursor::new(b"JUNKJUNK"), 16).is_err());
}

#[test]
fn key_json_round_trip_keeps_fingerprint() {
    let key = CipherKey::generate(TransformKind::MpgfrftII, 32, 9).unwrap();
    let back = CipherKey::from_json(&key.to_json_pretty()).unwrap();
    assert_eq!(back, key);
    assert_eq!(back.fingerprint(), key.fingerprint());
    assert_ne!(CipherKey::generate(TransformKind::MpgfrftII, 32, 10).unwrap().fingerprint(), key.fingerprint());
}

#[test]
fn signal_csv_round_trip_is_exact() {
    let dir = TempDir::new().unwrap();
    let values = DMatrix::from_fn(7, 3, |i, j| (i as f64 * 0.1 + j as f64).sin() / 3.0);
    let table = mpgfrft::io::SignalTable { values: values.clone(), coords: None };
    let path = dir.path().join("s.csv");
    save_signal_csv(&table, &path).unwrap();
    let back = load_signal_csv(&path).unwrap();
    assert_eq!(back.values, values);

    let mut text = Vec::new();
    write_signal_csv(&table, &mut text).unwrap();
    assert_eq!(parse_signal_csv(Cursor::new(text)).unwrap().values, values);
    assert!(parse_signal_csv(Cursor::new("1,2\n3,abc\n")).is_err());
}

#[test]
fn graph_and_orders_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = build_random_sensor_graph(9, 4).unwrap();
    let path = dir.path().join("g.csv");
    save_graph_csv(&g, &path).unwrap();
    let back = load_graph(&path).unwrap();
    assert_eq!(back.weights(), g.weights());

    let desc = dir.path().join("g.json");
    std::fs::write(&desc, r#"{"n": 9, "kind": "sensor", "seed": 4}"#).unwrap();
    assert_eq!(load_graph(&desc).unwrap().weights(), g.weights());

    let a = OrderVector::new(vec![0.1, -0.7, 1.0 / 3.0]).unwrap();
    assert_eq!(orders_from_json(&orders_to_json(&a)).unwrap(), a);
}

#[test]
fn png_round_trip_is_lossless() {
    let dir = TempDir::new().unwrap();
    let img = random_rgb(5, 7, 11);
    let path = dir.path().join("x.png");
    save_image(&img, &path).unwrap();
    assert_eq!(load_image(&path).unwrap(), img);
}
