use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use reidtrack_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { rt_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn det(x: f64, score: f64) -> RtDetection {
    RtDetection { x, y: 0.0, w: 10.0, h: 10.0, score, class_id: 1 }
}

struct Handle(*mut RtTracker);

impl Handle {
    fn new(cfg: Option<&RtConfig>) -> Result<Self, RtStatus> {
        let mut t = ptr::null_mut();
        let s = unsafe { rt_tracker_new(cfg.map_or(ptr::null(), |c| c as *const _), &mut t) };
        if s == RtStatus::Ok { Ok(Handle(t)) } else { Err(s) }
    }

    fn step(&self, frame: u32, dets: &[RtDetection], embs: &[f64], dim: usize) -> Result<Vec<RtOutput>, RtStatus> {
        let mut n = 0;
        let s = unsafe { rt_tracker_step(self.0, frame, dets.as_ptr(), dets.len(), embs.as_ptr(), dim, &mut n) };
        if s != RtStatus::Ok {
            return Err(s);
        }
        let mut out = vec![RtOutput::default(); n];
        let mut written = 0;
        let s = unsafe { rt_tracker_outputs(self.0, out.as_mut_ptr(), out.len(), &mut written) };
        assert_eq!((s, written), (RtStatus::Ok, n));
        Ok(out)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { rt_tracker_free(self.0) };
    }
}

#[test]
fn defaults_round_trip() {
    let mut c = std::mem::MaybeUninit::<RtConfig>::uninit();
    assert_eq!(unsafe { rt_config_default(c.as_mut_ptr()) }, RtStatus::Ok);
    let c = unsafe { c.assume_init() };
    assert_eq!((c.high_thresh, c.low_thresh, c.tau, c.max_lost_age), (0.84, 0.3, 30, 30));
    assert_eq!((c.per_class, c.low_only_second_stage, c.embedding_dim), (1, 0, 0));
    assert!(Handle::new(Some(&c)).is_ok());
    assert!(Handle::new(None).is_ok());
}

#[test]
fn tracks_follow_appearance() {
    let t = Handle::new(None).unwrap();
    let a = [1.0, 0.0, 0.0];
    let b = [0.0, 1.0, 0.0];
    let first = t.step(1, &[det(0.0, 0.9), det(50.0, 0.9)], &[a, b].concat(), 3).unwrap();
    let ids: Vec<u32> = first.iter().map(|o| o.track_id).collect();
    assert_eq!(ids, [1, 2]);
    // swapped order and a low score for `a`
    let second = t.step(2, &[det(60.0, 0.9), det(5.0, 0.5)], &[b, a].concat(), 3).unwrap();
    let by_id = |id: u32| second.iter().find(|o| o.track_id == id).unwrap().x;
    assert_eq!((by_id(1), by_id(2)), (5.0, 60.0));
    assert_eq!(unsafe { rt_tracker_tracks_created(t.0) }, 2);
}

#[test]
fn errors_map_to_codes_and_messages() {
    let t = Handle::new(None).unwrap();
    t.step(3, &[det(0.0, 0.9)], &[1.0, 0.0], 2).unwrap();
    assert_eq!(t.step(2, &[], &[], 0), Err(RtStatus::NonMonotonicFrame));
    assert!(last_error().contains("frame 2"));
    assert_eq!(t.step(4, &[det(0.0, 0.9)], &[1.0, 0.0, 0.0], 3), Err(RtStatus::DimensionMismatch));
    assert_eq!(t.step(5, &[det(0.0, 0.9)], &[0.0, 0.0], 2), Err(RtStatus::ZeroNorm));
    assert_eq!(t.step(6, &[det(0.0, 1.5)], &[1.0, 0.0], 2), Err(RtStatus::InvalidArgument));

    let mut bad = std::mem::MaybeUninit::<RtConfig>::uninit();
    unsafe { rt_config_default(bad.as_mut_ptr()) };
    let mut bad = unsafe { bad.assume_init() };
    bad.tau = 0;
    assert_eq!(Handle::new(Some(&bad)).err(), Some(RtStatus::InvalidConfig));

    let mut n = 0;
    assert_eq!(unsafe { rt_tracker_step(ptr::null_mut(), 1, ptr::null(), 0, ptr::null(), 0, &mut n) }, RtStatus::NullPointer);
    assert_eq!(unsafe { rt_tracker_new(ptr::null(), ptr::null_mut()) }, RtStatus::NullPointer);
}

#[test]
fn short_output_buffer_is_reported() {
    let t = Handle::new(None).unwrap();
    let mut n = 0;
    let dets = [det(0.0, 0.9), det(50.0, 0.9)];
    let embs = [1.0, 0.0, 0.0, 1.0];
    assert_eq!(unsafe { rt_tracker_step(t.0, 1, dets.as_ptr(), 2, embs.as_ptr(), 2, &mut n) }, RtStatus::Ok);
    let mut one = [RtOutput::default()];
    let mut written = 0;
    assert_eq!(unsafe { rt_tracker_outputs(t.0, one.as_mut_ptr(), 1, &mut written) }, RtStatus::BufferTooSmall);
    assert_eq!(written, 2);
}

#[test]
fn assignment_through_c_abi() {
    let costs = [1.0, 2.0, 2.0, f64::INFINITY, 3.0, 0.5];
    let mut r2c = [0i64; 2];
    let mut total = 0.0;
    assert_eq!(unsafe { rt_solve_assignment(costs.as_ptr(), 2, 3, r2c.as_mut_ptr(), &mut total) }, RtStatus::Ok);
    assert_eq!(r2c, [0, 2]);
    assert_eq!(total, 1.5);

    let all_forbidden = [f64::INFINITY; 2];
    assert_eq!(unsafe { rt_solve_assignment(all_forbidden.as_ptr(), 1, 2, r2c.as_mut_ptr(), &mut total) }, RtStatus::Ok);
    assert_eq!((r2c[0], total), (-1, 0.0));

    let nan = [f64::NAN];
    assert_eq!(unsafe { rt_solve_assignment(nan.as_ptr(), 1, 1, r2c.as_mut_ptr(), &mut total) }, RtStatus::InvalidArgument);
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(rt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/reidtrack.h")).unwrap();
    for name in [
        "rt_last_error_message", "rt_version", "rt_config_default", "rt_tracker_new", "rt_tracker_free",
        "rt_tracker_step", "rt_tracker_outputs", "rt_tracker_tracks_created", "rt_solve_assignment",
        "typedef struct RtTracker RtTracker",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Builds examples/demo.c against the static library when a C compiler is
/// on PATH.
#[test]
fn c_demo_links_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(cc.status.success());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libreidtrack_ffi.a");
    // `cargo test` builds only the rlib
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut build = Command::new(cargo);
    build
        .args(["build", "--lib", "-p", "reidtrack-ffi", "--target-dir"])
        .arg(profile_dir.parent().unwrap());
    if profile_dir.ends_with("release") {
        build.arg("--release");
    }
    assert!(build.status().unwrap().success());
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("demo");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("examples/demo.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "1 1 10.0\n1 2 90.0\n2 1 20.0\n2 2 80.0\n3 1 30.0\n3 2 70.0\n\
         status 6: frame 2 is not after previously processed frame 3\n\
         assign 1 0 4.0\n"
    );
}
