//! Numerical tolerances and size limits shared by all modules.

use std::sync::OnceLock;

/// Environment variable that overrides [`Config::max_dense_order`].
pub const MAX_ORDER_ENV: &str = "TOEPSPEC_MAX_ORDER";

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Config {
    /// Relative deflation tolerance of the Hessenberg QR iteration (times ‖A‖).
    pub eig_rel_tol: f64,
    /// QR sweeps allowed per eigenvalue before giving up.
    pub eig_max_sweeps: usize,
    /// Largest order accepted by the dense eigensolver and SVD.
    pub eig_max_order: usize,
    /// Default relative threshold of `numerical_rank`.
    pub rank_rel_tol: f64,
    /// Relative pivot size under which LU declares a matrix singular.
    pub lu_pivot_tol: f64,
    /// Distance from zero that separates sectorial from weakly sectorial.
    pub sector_tol: f64,
    /// Variance of the support values below which they count as constant.
    pub sector_variance_tol: f64,
    /// Default dense-matrix order cap.
    pub max_dense_order: usize,
    /// Coefficient quadrature points per dimension for general symbols.
    pub coeff_grid_1d: usize,
    pub coeff_grid_2d: usize,
    /// Angles sampled by the essential numerical range support function.
    pub angle_count: usize,
    /// Default outlier radius.
    pub outlier_eps: f64,
    /// Default region raster size (pixels per side).
    pub region_resolution: usize,
    /// Relative padding of the default region rectangle.
    pub region_padding: f64,
    /// GMRES tolerance used by the experiment runner.
    pub gmres_tol: f64,
}

impl Config {
    pub const DEFAULT: Config = Config {
        eig_rel_tol: 1e-10,
        eig_max_sweeps: 30,
        eig_max_order: 2048,
        rank_rel_tol: 1e-10,
        lu_pivot_tol: 1e-14,
        sector_tol: 1e-6,
        sector_variance_tol: 1e-10,
        max_dense_order: 2048,
        coeff_grid_1d: 1024,
        coeff_grid_2d: 128,
        angle_count: 720,
        outlier_eps: 0.1,
        region_resolution: 256,
        region_padding: 0.2,
        gmres_tol: 1e-6,
    };

    /// Dense order cap, honoring `TOEPSPEC_MAX_ORDER` when set to a positive integer.
    pub fn max_dense_order() -> usize {
        static CAP: OnceLock<usize> = OnceLock::new();
        *CAP.get_or_init(|| {
            std::env::var(MAX_ORDER_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v > 0)
                .unwrap_or(Config::DEFAULT.max_dense_order)
        })
    }

    /// Default coefficient grid size for a `k`-dimensional general symbol.
    pub fn default_coeff_grid(k: usize) -> usize {
        if k == 1 {
            Config::DEFAULT.coeff_grid_1d
        } else {
            Config::DEFAULT.coeff_grid_2d
        }
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::DEFAULT
    }
}
