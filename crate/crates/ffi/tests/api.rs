use std::ffi::CStr;
use std::ptr;

use pcm_em_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pcm_last_error()) }.to_string_lossy().into_owned()
}

fn signs(d: usize, seed: usize) -> Vec<i8> {
    (0..d).map(|i| if (i * 7 + seed * 13) % 5 < 2 { 1 } else { -1 }).collect()
}

struct Memory(*mut PcmMemory);

impl Drop for Memory {
    fn drop(&mut self) {
        unsafe { pcm_memory_free(self.0) }
    }
}

fn memory(rows: usize, cols: usize) -> Memory {
    let mut cfg = std::mem::MaybeUninit::<PcmMemoryConfig>::uninit();
    unsafe {
        assert_eq!(pcm_memory_config_default(cfg.as_mut_ptr()), PcmStatus::Ok);
        let mut cfg = cfg.assume_init();
        cfg.rows = rows;
        cfg.cols = cols;
        let mut m = ptr::null_mut();
        assert_eq!(pcm_memory_new(&cfg, &mut m), PcmStatus::Ok);
        Memory(m)
    }
}

#[test]
fn memory_and_oracle_agree() {
    let d = 64;
    let m = memory(d, 8);
    let mut o = ptr::null_mut();
    unsafe {
        assert_eq!(pcm_oracle_new(d, &mut o), PcmStatus::Ok);
        for class in 0..4u32 {
            for shot in 0..3 {
                let v = signs(d, class as usize * 10 + shot);
                let mut sat = 7u8;
                assert_eq!(pcm_memory_learn(m.0, class * 10, v.as_ptr(), d, &mut sat), PcmStatus::Ok);
                assert_eq!(sat, 0);
                assert_eq!(pcm_oracle_learn(o, class * 10, v.as_ptr(), d), PcmStatus::Ok);
            }
        }
        let mut n = 0;
        assert_eq!(pcm_memory_num_classes(m.0, &mut n), PcmStatus::Ok);
        assert_eq!(n, 4);
        let mut col = 0;
        assert_eq!(pcm_memory_column_of(m.0, 20, &mut col), PcmStatus::Ok);
        assert_eq!(col, 2);
        assert_eq!(pcm_memory_column_of(m.0, 21, &mut col), PcmStatus::InvalidArgument);

        for class in 0..4usize {
            let q: Vec<i8> = signs(d, class * 10).iter().map(|&s| s * 100).collect();
            let (mut a, mut b) = (u32::MAX, u32::MAX);
            assert_eq!(pcm_memory_classify(m.0, q.as_ptr(), d, &mut a), PcmStatus::Ok);
            assert_eq!(pcm_oracle_classify(o, q.as_ptr(), d, &mut b), PcmStatus::Ok);
            assert_eq!(a, b);
        }

        let q = vec![127i8; d];
        let (mut ids, mut codes, mut len) = ([0u32; 4], [0i32; 4], 0usize);
        assert_eq!(
            pcm_memory_scores(m.0, q.as_ptr(), d, ids.as_mut_ptr(), codes.as_mut_ptr(), 2, &mut len),
            PcmStatus::BufferTooSmall
        );
        assert_eq!(len, 4);
        assert_eq!(
            pcm_memory_scores(m.0, q.as_ptr(), d, ids.as_mut_ptr(), codes.as_mut_ptr(), 4, &mut len),
            PcmStatus::Ok
        );
        assert_eq!(ids, [0, 10, 20, 30]);
        let mut exact = [0i64; 4];
        assert_eq!(
            pcm_oracle_scores(o, q.as_ptr(), d, ids.as_mut_ptr(), exact.as_mut_ptr(), 4, &mut len),
            PcmStatus::Ok
        );
        // noiseless: ADC code = round(exact / (n_span * rows))
        for (c, e) in codes.iter().zip(exact) {
            assert_eq!(*c as f64, (e as f64 / (8.0 * d as f64)).round());
        }

        let (mut gp, mut gm, mut np, mut nm) = (0.0, 0.0, 0u32, 0u32);
        assert_eq!(pcm_memory_cell(m.0, 0, 0, &mut gp, &mut gm, &mut np, &mut nm), PcmStatus::Ok);
        assert_eq!(np + nm, 3);
        assert_eq!(gp - gm, (np as f64 - nm as f64) * 0.125);
        assert_eq!(pcm_memory_cell(m.0, d, 0, &mut gp, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), PcmStatus::InvalidArgument);
        pcm_oracle_free(o);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let d = 16;
    let m = memory(d, 2);
    let v = signs(d, 0);
    let q = vec![1i8; d];
    let mut class = 0;
    unsafe {
        assert_eq!(pcm_memory_classify(m.0, q.as_ptr(), d, &mut class), PcmStatus::EmptyMemory);
        assert!(last_error().contains("no classes"), "{}", last_error());
        assert_eq!(pcm_memory_learn(m.0, 0, v.as_ptr(), d - 1, ptr::null_mut()), PcmStatus::DimensionMismatch);
        let mut bad = v.clone();
        bad[3] = 0;
        assert_eq!(pcm_memory_learn(m.0, 0, bad.as_ptr(), d, ptr::null_mut()), PcmStatus::InvalidArgument);
        assert!(last_error().contains("element 3"));
        assert_eq!(pcm_memory_learn(m.0, 0, v.as_ptr(), d, ptr::null_mut()), PcmStatus::Ok);
        assert_eq!(last_error(), "");
        assert_eq!(pcm_memory_learn(m.0, 1, v.as_ptr(), d, ptr::null_mut()), PcmStatus::Ok);
        assert_eq!(pcm_memory_learn(m.0, 2, v.as_ptr(), d, ptr::null_mut()), PcmStatus::CapacityExceeded);
        let q128 = vec![-128i8; d];
        assert_eq!(pcm_memory_classify(m.0, q128.as_ptr(), d, &mut class), PcmStatus::InvalidArgument);
        assert_eq!(pcm_memory_classify(m.0, ptr::null(), d, &mut class), PcmStatus::NullPointer);
        assert_eq!(pcm_memory_classify(ptr::null_mut(), q.as_ptr(), d, &mut class), PcmStatus::NullPointer);
        assert_eq!(pcm_memory_classify(m.0, q.as_ptr(), d, ptr::null_mut()), PcmStatus::NullPointer);

        let mut cfg = std::mem::zeroed::<PcmMemoryConfig>();
        pcm_memory_config_default(&mut cfg);
        cfg.device.increment_shape = 9;
        let mut h = ptr::null_mut();
        assert_eq!(pcm_memory_new(&cfg, &mut h), PcmStatus::InvalidConfig);
        assert!(h.is_null());
        cfg.device.increment_shape = PcmIncrementShape::Saturating as u32;
        cfg.adc_bits = 0;
        assert_eq!(pcm_memory_new(&cfg, &mut h), PcmStatus::InvalidConfig);
        cfg.adc_bits = 8;
        cfg.rows = 0;
        assert_eq!(pcm_memory_new(&cfg, &mut h), PcmStatus::InvalidConfig);
        assert_eq!(pcm_memory_new(ptr::null(), &mut h), PcmStatus::NullPointer);
        pcm_memory_free(ptr::null_mut());
        pcm_oracle_free(ptr::null_mut());
    }
}

#[test]
fn noisy_memory_is_reproducible_per_seed() {
    let d = 32;
    let run = |seed: u64, frozen: u8| unsafe {
        let mut cfg = std::mem::zeroed::<PcmMemoryConfig>();
        pcm_memory_config_default(&mut cfg);
        cfg.rows = d;
        cfg.cols = 4;
        cfg.seed = seed;
        cfg.frozen_read_noise = frozen;
        cfg.device.sigma_prog = 0.05;
        cfg.device.sigma_read = 0.02;
        let mut m = ptr::null_mut();
        assert_eq!(pcm_memory_new(&cfg, &mut m), PcmStatus::Ok);
        let m = Memory(m);
        let v = signs(d, 1);
        pcm_memory_learn(m.0, 5, v.as_ptr(), d, ptr::null_mut());
        let mut g = [0.0; 2];
        pcm_memory_cell(m.0, 3, 0, &mut g[0], &mut g[1], ptr::null_mut(), ptr::null_mut());
        g
    };
    assert_eq!(run(1, 0), run(1, 0));
    assert_eq!(run(1, 1), run(1, 1));
    assert_ne!(run(1, 0), run(2, 0));
}

#[test]
fn energy_functions() {
    unsafe {
        let mut p = std::mem::zeroed::<PcmEnergyParams>();
        assert_eq!(pcm_energy_params_default(&mut p), PcmStatus::Ok);
        let mut e = 0.0;
        assert_eq!(pcm_energy_pulse(&p, &mut e), PcmStatus::Ok);
        assert!((e - 8.775e-12).abs() < 1e-24);
        let mut c = PcmCost::default();
        assert_eq!(pcm_energy_class_update(&p, 256, &mut c), PcmStatus::Ok);
        assert!((c.seconds - 11.52e-6).abs() < 1e-15);
        assert_eq!(pcm_energy_sessions_update(&p, 25, 5, 256, &mut c), PcmStatus::Ok);
        assert!((c.seconds - 57.6e-6).abs() < 1e-15);
        assert!((c.joules - 56.16e-9).abs() < 1e-18);
        p.programming_mode = PcmProgrammingMode::Serial as u32;
        assert_eq!(pcm_energy_sessions_update(&p, 25, 5, 256, &mut c), PcmStatus::Ok);
        assert!((c.seconds - 288e-6).abs() < 1e-15);
        assert_eq!(pcm_energy_sessions_update(&p, 0, 5, 256, &mut c), PcmStatus::InvalidConfig);
        assert_eq!(pcm_energy_evaluation(&p, 10_000, &mut c), PcmStatus::Ok);
        assert!((c.joules - 77.4e-6).abs() < 1e-15);
        p.programming_mode = 5;
        assert_eq!(pcm_energy_pulse(&p, &mut e), PcmStatus::InvalidConfig);
        p.programming_mode = 0;
        p.v_source = -1.0;
        assert_eq!(pcm_energy_pulse(&p, &mut e), PcmStatus::InvalidConfig);
    }
}

#[test]
fn status_strings() {
    let s = |c: i32| unsafe { CStr::from_ptr(pcm_status_str(c)) }.to_str().unwrap().to_owned();
    assert_eq!(s(PcmStatus::Ok as i32), "ok");
    assert_eq!(s(PcmStatus::CapacityExceeded as i32), "capacity exceeded");
    assert_eq!(s(-4), "unknown status");
    let v = unsafe { CStr::from_ptr(pcm_version()) }.to_str().unwrap().to_owned();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/pcm_em.h");
    let src = include_str!("../src/lib.rs");
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 20);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for item in ["typedef struct PcmMemory PcmMemory;", "typedef struct PcmOracle PcmOracle;", "PCM_STATUS_CAPACITY_EXCEEDED = 4"] {
        assert!(header.contains(item), "{item}");
    }
}
