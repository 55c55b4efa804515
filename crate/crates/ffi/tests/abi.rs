use std::ffi::{CStr, CString};
use std::ptr;

use tonereserve_ffi::*;

fn last_error() -> String {
    let p = tr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_two_rademachers_through_the_abi() {
    unsafe {
        let info = [3usize, 2];
        let comp = [1usize, 4];
        let re = [1.0, 1.0];
        let mut problem = ptr::null_mut();
        let status = tr_problem_new(
            TrSystem::Walsh, 4, info.as_ptr(), 2, comp.as_ptr(), 2, re.as_ptr(), ptr::null(), &mut problem,
        );
        assert_eq!(status, TrStatus::Ok);
        let mut result = ptr::null_mut();
        assert_eq!(tr_solve(problem, TrMethod::Lp, 0, 0.0, &mut result), TrStatus::Ok);
        let (mut sup, mut gap, mut converged) = (0.0, 0.0, false);
        assert_eq!(tr_result_summary(result, &mut sup, &mut gap, &mut converged), TrStatus::Ok);
        // r₀ + r₁ peaks at 2 on the outer cells; no compensation lowers both
        assert!((sup - 2.0).abs() < 1e-9);
        assert!(converged);
        let (mut re_b, mut im_b) = ([9.0; 4], [9.0; 4]);
        assert_eq!(tr_result_compensation(result, re_b.as_mut_ptr(), im_b.as_mut_ptr(), 4), TrStatus::Ok);
        assert_eq!(re_b[1], 0.0);
        assert_eq!(re_b[2], 0.0);
        assert_eq!(tr_result_compensation(result, re_b.as_mut_ptr(), im_b.as_mut_ptr(), 3), TrStatus::InvalidArgument);
        let mut json = ptr::null_mut();
        assert_eq!(tr_result_to_json(result, &mut json), TrStatus::Ok);
        let parsed: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed["method"], "lp");
        tr_string_free(json);
        tr_result_free(result);
        tr_problem_free(problem);
    }
}

#[test]
fn problem_json_round_trips() {
    unsafe {
        let info = [1usize];
        let re = [0.5];
        let im = [0.25];
        let mut problem = ptr::null_mut();
        let status = tr_problem_new(
            TrSystem::Fourier, 4, info.as_ptr(), 1, ptr::null(), 0, re.as_ptr(), im.as_ptr(), &mut problem,
        );
        assert_eq!(status, TrStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(tr_problem_to_json(problem, &mut json), TrStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(tr_problem_from_json(json, &mut again), TrStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(tr_problem_to_json(again, &mut json2), TrStatus::Ok);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(json2));
        tr_string_free(json);
        tr_string_free(json2);
        tr_problem_free(problem);
        tr_problem_free(again);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut problem = ptr::null_mut();
        let info = [5usize];
        let re = [1.0];
        let status = tr_problem_new(
            TrSystem::Walsh, 4, info.as_ptr(), 1, ptr::null(), 0, re.as_ptr(), ptr::null(), &mut problem,
        );
        assert_eq!(status, TrStatus::IndexOutOfRange);
        assert!(problem.is_null());
        assert!(last_error().contains('5'));

        let info = [1usize];
        let zero = [0.0];
        let status = tr_problem_new(
            TrSystem::Walsh, 4, info.as_ptr(), 1, ptr::null(), 0, zero.as_ptr(), ptr::null(), &mut problem,
        );
        assert_eq!(status, TrStatus::ZeroVector);

        let mut papr = 0.0;
        let ones = [1.0; 3];
        assert_eq!(tr_papr(TrSystem::Walsh, 3, ones.as_ptr(), ptr::null(), &mut papr), TrStatus::NotPowerOfTwo);
        assert_eq!(tr_papr(TrSystem::Walsh, 3, ones.as_ptr(), ptr::null(), ptr::null_mut()), TrStatus::NullPointer);
        assert_eq!(tr_solve(ptr::null(), TrMethod::Lp, 0, 0.0, &mut ptr::null_mut()), TrStatus::NullPointer);

        let bad = CString::new("{\"system\":\"walsh\"}").unwrap();
        assert_eq!(tr_problem_from_json(bad.as_ptr(), &mut problem), TrStatus::InvalidArgument);
    }
}

#[test]
fn papr_of_the_flat_witness() {
    unsafe {
        let a = [0.25; 16];
        let mut papr = 0.0;
        assert_eq!(tr_papr(TrSystem::Walsh, 16, a.as_ptr(), ptr::null(), &mut papr), TrStatus::Ok);
        assert!((papr - 4.0).abs() < 1e-12);
        assert_eq!(tr_papr(TrSystem::Fourier, 16, a.as_ptr(), ptr::null(), &mut papr), TrStatus::Ok);
        assert!((papr - 4.0).abs() < 1e-9);
    }
}

#[test]
fn split_trace_and_bound() {
    unsafe {
        let set = [1usize, 2, 3, 4];
        let mut trace = ptr::null_mut();
        assert_eq!(tr_split_trace(4, set.as_ptr(), 4, &mut trace), TrStatus::Ok);
        let (mut m, mut holds) = (0usize, false);
        assert_eq!(tr_trace_summary(trace, &mut m, &mut holds), TrStatus::Ok);
        assert_eq!(m, 2);
        assert!(holds);
        let mut json = ptr::null_mut();
        assert_eq!(tr_trace_to_json(trace, &mut json), TrStatus::Ok);
        let parsed: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(parsed["stages"][0]["r"], 2);
        tr_string_free(json);
        tr_trace_free(trace);

        let (mut bound, mut stages) = (0.0, 0usize);
        assert_eq!(tr_cex_lower_bound_walsh(0.5, 4096, &mut bound, &mut stages), TrStatus::Ok);
        assert_eq!(stages, 5);
        assert!((bound - 7.0 / 6.0).abs() < 1e-15);
    }
}

#[test]
fn freeing_null_is_a_no_op() {
    unsafe {
        tr_problem_free(ptr::null_mut());
        tr_result_free(ptr::null_mut());
        tr_trace_free(ptr::null_mut());
        tr_string_free(ptr::null_mut());
    }
}
