//! Process CPU time (user + system), the measure used for method timing.

/// Total user+system CPU seconds consumed by this process so far,
/// including worker threads. Selection timings are deltas of this value,
/// so precompute and report writing stay out of the accounting.
pub fn process_cpu_seconds() -> f64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::uninit();
    // getrusage(RUSAGE_SELF) only fails for invalid arguments
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    assert_eq!(rc, 0, "getrusage failed");
    let usage = unsafe { usage.assume_init() };
    let to_secs =
        |tv: libc::timeval| tv.tv_sec as f64 + tv.tv_usec as f64 / 1e6;
    to_secs(usage.ru_utime) + to_secs(usage.ru_stime)
}
