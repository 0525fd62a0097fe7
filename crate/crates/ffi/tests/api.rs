use std::ffi::{CStr, CString};
use std::ptr;

use mfnipr_ffi::*;

fn last_error() -> String {
    let p = mfn_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn generate_solve_and_inspect() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(mfn_instance_generate(4, 50, MfnVariant::Base, &mut inst), MfnStatus::Ok);
        assert!(mfn_instance_num_nodes(inst) > 50);
        let mut flow = 0.0;
        assert_eq!(mfn_instance_base_flow(inst, &mut flow), MfnStatus::Ok);
        assert!(flow > 0.0);

        let mut json = ptr::null_mut();
        assert_eq!(mfn_instance_to_json(inst, &mut json), MfnStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(mfn_instance_from_json(json, &mut copy), MfnStatus::Ok);
        assert_eq!(mfn_instance_num_nodes(copy), mfn_instance_num_nodes(inst));
        assert_eq!(mfn_instance_num_restructurable(copy), mfn_instance_num_restructurable(inst));
        mfn_string_free(json);
        mfn_instance_free(copy);

        let opts = mfn_solve_options_default();
        let mut res = ptr::null_mut();
        assert_eq!(mfn_solve(inst, &opts, &mut res), MfnStatus::Ok);
        let mut status = MfnSolveStatus::TimeLimit;
        assert_eq!(mfn_result_status(res, &mut status), MfnStatus::Ok);
        assert_eq!(status, MfnSolveStatus::Optimal);
        assert!((mfn_result_upper(res) - flow).abs() <= 1e-6);
        assert!(mfn_result_lower(res) <= mfn_result_upper(res) + 1e-9);
        assert!(mfn_result_iterations(res) >= 1);
        assert!(mfn_result_plans_visited(res) >= 1);
        assert_eq!(mfn_result_interdicted(res, ptr::null_mut(), 0), 0);

        let mut out = ptr::null_mut();
        assert_eq!(mfn_result_to_json(res, &mut out), MfnStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap();
        let value: serde_json::Value = serde_json::from_str(text).unwrap();
        assert_eq!(value["status"], "optimal");
        mfn_string_free(out);
        mfn_result_free(res);
        mfn_instance_free(inst);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut inst = ptr::null_mut();
        assert_eq!(mfn_instance_from_json(ptr::null(), &mut inst), MfnStatus::NullPointer);
        assert!(last_error().contains("json"));
        assert!(inst.is_null());

        let bad = CString::new(r#"{"nodes": 3}"#).unwrap();
        assert_eq!(mfn_instance_from_json(bad.as_ptr(), &mut inst), MfnStatus::Parse);
        assert!(last_error().contains("nodes"));

        let path = CString::new("/nonexistent/instance.json").unwrap();
        assert_eq!(mfn_instance_from_file(path.as_ptr(), &mut inst), MfnStatus::Io);

        assert_eq!(mfn_instance_generate(1, 50, MfnVariant::Base, &mut inst), MfnStatus::Ok);
        let mut opts = mfn_solve_options_default();
        opts.budget = -1.0;
        let mut res = ptr::null_mut();
        assert_eq!(mfn_solve(inst, &opts, &mut res), MfnStatus::InvalidArgument);
        assert!(res.is_null());
        assert_eq!(mfn_solve(inst, ptr::null(), &mut res), MfnStatus::NullPointer);
        mfn_instance_free(inst);

        assert!(mfn_result_lower(ptr::null()).is_nan());
        assert_eq!(mfn_result_iterations(ptr::null()), 0);
        mfn_instance_free(ptr::null_mut());
        mfn_result_free(ptr::null_mut());
        mfn_string_free(ptr::null_mut());
    }
}
