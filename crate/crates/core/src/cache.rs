//! Process-wide profile cache with optional on-disk persistence.
//!
//! Parameter searches hit the same `(n, alpha, rmax, tol)` tuple repeatedly:
//! bisection revisits bracket endpoints, certificates re-probe them, and
//! report generation fans out work that shares profiles. Solutions are
//! immutable once computed, so they are held as `Arc`s in a map guarded by
//! an `RwLock` (lookups vastly outnumber inserts).
//!
//! When the `KSI_CACHE_DIR` environment variable names a directory, every
//! solve is also persisted there as a JSON snapshot of the sampled solution
//! (output grid, values, derivatives, launch series), and later runs
//! rehydrate the snapshot instead of integrating again. A solved profile
//! keeps its dense output as Hermite cells on the sampled grid, so the
//! snapshot is lossless: a rehydrated profile evaluates exactly like a
//! freshly solved one.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::profile::{ProfileOde, ProfileSolution, solve_profile};
use crate::radial_ivp::{IvpResult, SeriesLaunch, TerminationReason, hermite_cells};

type Key = (usize, u64, u64, u64);

static CACHE: OnceLock<RwLock<HashMap<Key, Arc<ProfileSolution>>>> = OnceLock::new();

fn cache() -> &'static RwLock<HashMap<Key, Arc<ProfileSolution>>> {
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `solve_profile` with memoization. The disk layer is controlled by the
/// `KSI_CACHE_DIR` environment variable; see the module docs.
pub fn solve_profile_cached(
    n: usize,
    alpha: f64,
    rmax: f64,
    tol: f64,
) -> Result<Arc<ProfileSolution>> {
    let dir = std::env::var_os("KSI_CACHE_DIR").map(PathBuf::from);
    solve_profile_cached_in(dir.as_deref(), n, alpha, rmax, tol)
}

/// As `solve_profile_cached`, with the snapshot directory passed explicitly;
/// `None` disables the disk layer.
pub fn solve_profile_cached_in(
    dir: Option<&Path>,
    n: usize,
    alpha: f64,
    rmax: f64,
    tol: f64,
) -> Result<Arc<ProfileSolution>> {
    let key = (n, alpha.to_bits(), rmax.to_bits(), tol.to_bits());
    if let Some(hit) = cache().read().expect("cache lock poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let sol = match dir.and_then(|d| load_snapshot(d, n, alpha, rmax, tol)) {
        Some(s) => Arc::new(s),
        None => {
            let s = Arc::new(solve_profile(n, alpha, rmax, tol)?);
            if let Some(d) = dir {
                // A failed cache write must not fail the solve.
                let _ = store_snapshot(d, &s);
            }
            s
        }
    };
    let mut map = cache().write().expect("cache lock poisoned");
    Ok(map.entry(key).or_insert(sol).clone())
}

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Deserialize, Serialize)]
struct Snapshot {
    version: u32,
    n: usize,
    alpha: f64,
    rmax: f64,
    tol: f64,
    terminated_at: f64,
    launch: SeriesLaunch,
    grid: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
}

fn snapshot_path(dir: &Path, n: usize, alpha: f64, rmax: f64, tol: f64) -> PathBuf {
    dir.join(format!(
        "profile-n{n}-a{:016x}-r{:016x}-t{:016x}.json",
        alpha.to_bits(),
        rmax.to_bits(),
        tol.to_bits()
    ))
}

fn store_snapshot(dir: &Path, sol: &ProfileSolution) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let snap = Snapshot {
        version: SNAPSHOT_VERSION,
        n: sol.n,
        alpha: sol.alpha,
        rmax: sol.rmax,
        tol: sol.tol,
        terminated_at: sol.ivp.terminated_at,
        launch: sol.launch().clone(),
        grid: sol.grid.clone(),
        u: sol.u.clone(),
        du: sol.du.clone(),
    };
    let bytes = serde_json::to_vec(&snap).map_err(std::io::Error::other)?;
    let path = snapshot_path(dir, sol.n, sol.alpha, sol.rmax, sol.tol);
    // Write-then-rename so concurrent readers never see a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, &path)
}

fn load_snapshot(
    dir: &Path,
    n: usize,
    alpha: f64,
    rmax: f64,
    tol: f64,
) -> Option<ProfileSolution> {
    let bytes = std::fs::read(snapshot_path(dir, n, alpha, rmax, tol)).ok()?;
    let snap: Snapshot = serde_json::from_slice(&bytes).ok()?;
    let m = snap.grid.len();
    let consistent = snap.version == SNAPSHOT_VERSION
        && snap.n == n
        && snap.alpha == alpha
        && snap.rmax == rmax
        && snap.tol == tol
        && m >= 2
        && snap.u.len() == m
        && snap.du.len() == m
        && snap.grid[0] == snap.launch.launch_radius
        && snap.grid.windows(2).all(|w| w[0] < w[1]);
    if !consistent {
        return None;
    }
    Some(rehydrate(snap))
}

/// Rebuild a solution from its sampled snapshot. The segments come out
/// identical to what `solve_profile` keeps after compaction, so a
/// rehydrated profile evaluates exactly like a freshly solved one.
fn rehydrate(snap: Snapshot) -> ProfileSolution {
    let ode = ProfileOde { n: snap.n };
    let segments = hermite_cells(&ode, &snap.grid, &snap.u, &snap.du);
    let ivp = IvpResult {
        grid: snap.grid.clone(),
        value: snap.u.clone(),
        derivative: snap.du.clone(),
        terminated_at: snap.terminated_at,
        termination_reason: TerminationReason::ReachedRmax,
        launch: snap.launch,
        segments,
        n_evals: 0,
    };
    ProfileSolution {
        n: snap.n,
        alpha: snap.alpha,
        grid: snap.grid,
        u: snap.u,
        du: snap.du,
        rmax: snap.rmax,
        tol: snap.tol,
        ivp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearized::count_unstable_eigenvalues;

    struct TempDir(PathBuf);

    impl TempDir {
        fn new(tag: &str) -> TempDir {
            let dir = std::env::temp_dir()
                .join(format!("ksi-cache-test-{tag}-{}", std::process::id()));
            let _ = std::fs::remove_dir_all(&dir);
            std::fs::create_dir_all(&dir).unwrap();
            TempDir(dir)
        }
    }

    impl Drop for TempDir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.0);
        }
    }

    #[test]
    fn memoized_solve_returns_the_same_allocation() {
        let a = solve_profile_cached_in(None, 5, 0.37, 40.0, 1e-10).unwrap();
        let b = solve_profile_cached_in(None, 5, 0.37, 40.0, 1e-10).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = solve_profile_cached_in(None, 5, 0.37, 40.0, 1e-8).unwrap();
        assert!(!Arc::ptr_eq(&a, &c), "different tolerance must be a different entry");
    }

    #[test]
    fn precondition_failures_pass_through() {
        let err = solve_profile_cached_in(None, 5, -1.0, 40.0, 1e-10).unwrap_err();
        assert!(err.is_precondition());
    }

    #[test]
    fn snapshot_round_trip_preserves_dense_evaluation() {
        let tmp = TempDir::new("roundtrip");
        let (n, alpha, rmax, tol) = (5, 1.0, 60.0, 1e-10);
        let direct = solve_profile(n, alpha, rmax, tol).unwrap();
        store_snapshot(&tmp.0, &direct).unwrap();
        let loaded = load_snapshot(&tmp.0, n, alpha, rmax, tol).expect("snapshot should load");

        // Off-node radii spanning launch region, core, and tail.
        for &rho in &[0.004, 0.05, 0.7003, 1.9997, 3.3, 11.13, 27.7, 59.9] {
            let [u, du] = direct.eval(rho);
            let [v, dv] = loaded.eval(rho);
            assert!((u - v).abs() <= 1e-10 * u.abs().max(1e-3), "u mismatch at {rho}: {u} {v}");
            assert!(
                (du - dv).abs() <= 1e-9 * du.abs().max(1e-3),
                "u' mismatch at {rho}: {du} {dv}"
            );
        }

        // The rehydrated profile must be usable where it matters: driving
        // probes to the same stabilized zero count.
        let k_direct = count_unstable_eigenvalues(&direct, 0.0, 20.0).unwrap();
        let k_loaded = count_unstable_eigenvalues(&loaded, 0.0, 20.0).unwrap();
        assert_eq!(k_direct, k_loaded);
    }

    #[test]
    fn disk_layer_served_on_a_cold_in_memory_cache() {
        let tmp = TempDir::new("cold");
        // Distinctive tolerance so this test owns its in-memory keys.
        let (n, alpha, rmax, tol) = (5, 2.5, 40.0, 2e-10);
        let first = solve_profile_cached_in(Some(&tmp.0), n, alpha, rmax, tol).unwrap();
        assert!(snapshot_path(&tmp.0, n, alpha, rmax, tol).exists());

        // A second process would start with an empty map; emulate it by
        // loading the snapshot directly and comparing.
        let loaded = load_snapshot(&tmp.0, n, alpha, rmax, tol).expect("snapshot should load");
        assert_eq!(loaded.grid, first.grid);
        assert_eq!(loaded.u, first.u);
        let [u0, _] = loaded.eval(17.77);
        let [u1, _] = first.eval(17.77);
        assert!((u0 - u1).abs() <= 1e-10 * u1.abs());
    }

    #[test]
    fn corrupt_snapshot_falls_back_to_solving() {
        let tmp = TempDir::new("corrupt");
        let (n, alpha, rmax, tol) = (5, 3.5, 40.0, 3e-10);
        let path = snapshot_path(&tmp.0, n, alpha, rmax, tol);
        std::fs::write(&path, b"{ not json").unwrap();
        let sol = solve_profile_cached_in(Some(&tmp.0), n, alpha, rmax, tol).unwrap();
        assert_eq!(sol.n, n);
        assert_eq!(sol.alpha, alpha);
    }
}
