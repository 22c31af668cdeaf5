use std::ffi::{CStr, CString};
use std::ptr;

use hfce_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hfce_last_error()) }.to_string_lossy().into_owned()
}

fn desk() -> *mut HfceConfig {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { hfce_config_desk(&mut cfg) }, HfceStatus::Ok);
    cfg
}

#[test]
fn estimate_pipeline_matches_core() {
    unsafe {
        let cfg = desk();
        let mut info = HfceSystemInfo::default();
        assert_eq!(hfce_config_system(cfg, &mut info), HfceStatus::Ok);
        assert_eq!(info.n_antennas, 64);

        let mut dict = ptr::null_mut();
        assert_eq!(hfce_dictionary_build(cfg, HfceDictionaryKind::Polar, &mut dict), HfceStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(hfce_dictionary_shape(dict, &mut rows, &mut cols), HfceStatus::Ok);
        let core_dict = hfce::dictionary::build_dictionary(
            &hfce::config::ExperimentConfig::desk().system,
            &hfce::config::ExperimentConfig::desk().dictionary,
            hfce::config::DictionaryKind::Polar,
        )
        .unwrap();
        assert_eq!((rows, cols), (64, core_dict.n_columns()));
        let mut buf = vec![HfceComplex64::default(); rows * cols];
        assert_eq!(hfce_dictionary_copy(dict, buf.as_mut_ptr(), buf.len()), HfceStatus::Ok);
        let v = core_dict.matrix()[(3, 5)];
        assert_eq!((buf[3 * cols + 5].re, buf[3 * cols + 5].im), (v.re, v.im));

        let mut channel = ptr::null_mut();
        assert_eq!(hfce_channel_generate(cfg, 0, &mut channel), HfceStatus::Ok);
        let (mut n, mut m, mut paths) = (0, 0, 0);
        assert_eq!(hfce_channel_shape(channel, &mut n, &mut m, &mut paths), HfceStatus::Ok);
        assert_eq!((n, m, paths), (64, 16, 4));

        let mut est = ptr::null_mut();
        assert_eq!(hfce_estimate(cfg, dict, channel, 30.0, 0, 0, &mut est), HfceStatus::Ok);
        let mut count = 0;
        assert_eq!(hfce_estimate_support(est, ptr::null_mut(), 0, &mut count), HfceStatus::Ok);
        assert_eq!(count, 4);
        let mut support = vec![0usize; count];
        assert_eq!(hfce_estimate_support(est, support.as_mut_ptr(), 1, &mut count), HfceStatus::BufferTooSmall);
        assert_eq!(hfce_estimate_support(est, support.as_mut_ptr(), support.len(), &mut count), HfceStatus::Ok);
        assert!(support.iter().all(|&k| k < cols));

        let mut e = 0.0;
        assert_eq!(hfce_estimate_nmse_db(est, channel, &mut e), HfceStatus::Ok);
        let mut h = vec![HfceComplex64::default(); n * m];
        let mut h_hat = vec![HfceComplex64::default(); n * m];
        assert_eq!(hfce_channel_copy(channel, h.as_mut_ptr(), h.len()), HfceStatus::Ok);
        assert_eq!(hfce_estimate_copy(est, h_hat.as_mut_ptr(), h_hat.len()), HfceStatus::Ok);
        let mut e2 = 0.0;
        assert_eq!(hfce_nmse_db(h.as_ptr(), h_hat.as_ptr(), n, m, &mut e2), HfceStatus::Ok);
        assert!((e - e2).abs() < 1e-9, "{e} vs {e2}");
        assert!(e < 0.0);

        hfce_estimate_free(est);
        hfce_channel_free(channel);
        hfce_dictionary_free(dict);
        hfce_config_free(cfg);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let cfg = desk();
        assert_eq!(hfce_config_set_array(cfg, 64, 0, 4), HfceStatus::Config);
        assert!(!last_error().is_empty());
        let mut info = HfceSystemInfo::default();
        assert_eq!(hfce_config_system(cfg, &mut info), HfceStatus::Ok);
        assert_eq!(info.n_rf_chains, 8, "failed update must leave the config untouched");
        assert!(last_error().is_empty());

        assert_eq!(hfce_config_system(ptr::null(), &mut info), HfceStatus::NullPointer);
        let missing = CString::new("/nonexistent/config.toml").unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(hfce_config_load(missing.as_ptr(), &mut other), HfceStatus::Io);
        assert!(other.is_null());

        let zero = [HfceComplex64::default(); 4];
        let mut out = 0.0;
        assert_eq!(hfce_nmse_db(zero.as_ptr(), zero.as_ptr(), 2, 2, &mut out), HfceStatus::InvalidArgument);
        hfce_config_free(cfg);
        hfce_config_free(ptr::null_mut());
    }
}

#[test]
fn tensor_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.hfct").to_str().unwrap()).unwrap();
    let dims = [2usize, 3];
    let data: Vec<HfceComplex32> = (0..6)
        .map(|i| HfceComplex32 { re: i as f32, im: -(i as f32) * 0.5 })
        .collect();
    unsafe {
        assert_eq!(hfce_tensor_write(path.as_ptr(), dims.as_ptr(), 2, data.as_ptr()), HfceStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(hfce_tensor_read(path.as_ptr(), &mut t), HfceStatus::Ok);
        assert_eq!(hfce_tensor_ndim(t), 2);
        assert_eq!(std::slice::from_raw_parts(hfce_tensor_dims(t), 2), &dims);
        assert_eq!(std::slice::from_raw_parts(hfce_tensor_data(t), 6), &data[..]);
        hfce_tensor_free(t);

        std::fs::write(dir.path().join("t.hfct"), b"HFCX").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(hfce_tensor_read(path.as_ptr(), &mut t), HfceStatus::Format);
        assert!(last_error().contains("byte 0"), "{}", last_error());
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hfce.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let mut seen = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            seen += 1;
        }
    }
    assert!(seen > 20);
}
