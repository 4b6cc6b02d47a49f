#![allow(non_snake_case)]

use clarabel::algebra::CscMatrix;
use clarabel::solver::*;
use std::os::raw::{c_char, c_int, c_uint};
use std::slice;

#[repr(C)]
pub struct Problem {
    m: usize,
    n: usize,
    p_colptr: *const usize,
    p_rowval: *const usize,
    p_nzval: *const f64,
    a_colptr: *const usize,
    a_rowval: *const usize,
    a_nzval: *const f64,
    q: *const f64,
    b: *const f64,
    zero: usize,
    nonneg: usize,
    soc: *const usize,
    n_soc: usize,
    psd: *const usize,
    n_psd: usize,
}

#[repr(C)]
pub struct Settings {
    tol_feas: f64,
    tol_gap_abs: f64,
    tol_gap_rel: f64,
    max_iter: c_uint,
    time_limit: f64,
    verbose: c_int,
    equilibrate: c_int,
}

#[repr(C)]
pub struct Info {
    status: c_int,
    iterations: c_uint,
    obj_val: f64,
    solve_time: f64,
    r_prim: f64,
    r_dual: f64,
}

unsafe fn view<'a, T>(p: *const T, len: usize) -> &'a [T] {
    if len == 0 || p.is_null() {
        &[]
    } else {
        slice::from_raw_parts(p, len)
    }
}

unsafe fn csc(m: usize, n: usize, colptr: *const usize, rowval: *const usize, nzval: *const f64) -> CscMatrix<f64> {
    let cp = view(colptr, n + 1).to_vec();
    let nnz = cp[n];
    CscMatrix::new(m, n, cp, view(rowval, nnz).to_vec(), view(nzval, nnz).to_vec())
}

fn status_code(s: SolverStatus) -> c_int {
    match s {
        SolverStatus::Unsolved => 0,
        SolverStatus::Solved => 1,
        SolverStatus::PrimalInfeasible => 2,
        SolverStatus::DualInfeasible => 3,
        SolverStatus::AlmostSolved => 4,
        SolverStatus::AlmostPrimalInfeasible => 5,
        SolverStatus::AlmostDualInfeasible => 6,
        SolverStatus::MaxIterations => 7,
        SolverStatus::MaxTime => 8,
        SolverStatus::NumericalError => 9,
        SolverStatus::InsufficientProgress => 10,
        _ => 11,
    }
}

/// # Safety
/// All pointers must be valid for the sizes described in `prob`; `x` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn clarabel_ffi_solve(
    prob: *const Problem,
    settings: *const Settings,
    x: *mut f64,
    info: *mut Info,
) -> c_int {
    let pr = &*prob;
    let st = &*settings;
    let out = &mut *info;
    out.status = -1;
    out.iterations = 0;

    let P = csc(pr.n, pr.n, pr.p_colptr, pr.p_rowval, pr.p_nzval);
    let A = csc(pr.m, pr.n, pr.a_colptr, pr.a_rowval, pr.a_nzval);
    let q = view(pr.q, pr.n);
    let b = view(pr.b, pr.m);

    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if pr.zero > 0 {
        cones.push(ZeroConeT(pr.zero));
    }
    if pr.nonneg > 0 {
        cones.push(NonnegativeConeT(pr.nonneg));
    }
    for &k in view(pr.soc, pr.n_soc) {
        cones.push(SecondOrderConeT(k));
    }
    for &k in view(pr.psd, pr.n_psd) {
        cones.push(PSDTriangleConeT(k));
    }

    let mut s = DefaultSettings::<f64>::default();
    s.tol_feas = st.tol_feas;
    s.tol_gap_abs = st.tol_gap_abs;
    s.tol_gap_rel = st.tol_gap_rel;
    s.max_iter = st.max_iter;
    s.time_limit = if st.time_limit > 0.0 { st.time_limit } else { f64::INFINITY };
    s.verbose = st.verbose != 0;
    s.equilibrate_enable = st.equilibrate != 0;

    let mut solver = match DefaultSolver::new(&P, q, &A, b, &cones, s) {
        Ok(v) => v,
        Err(_) => return -1,
    };
    solver.solve();
    let sol = &solver.solution;
    slice::from_raw_parts_mut(x, pr.n).copy_from_slice(&sol.x);
    out.status = status_code(sol.status);
    out.iterations = sol.iterations;
    out.obj_val = sol.obj_val;
    out.solve_time = sol.solve_time;
    out.r_prim = sol.r_prim;
    out.r_dual = sol.r_dual;
    out.status
}

#[no_mangle]
pub extern "C" fn clarabel_ffi_version() -> *const c_char {
    concat!("clarabel 0.11.1", "\0").as_ptr() as *const c_char
}
