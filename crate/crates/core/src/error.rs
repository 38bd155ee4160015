use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular input: {what} (|value| = {value:e})")]
    Singular { what: &'static str, value: f64 },

    #[error("root finder failed on [{lo}, {hi}]: {reason}")]
    RootFinder { lo: f64, hi: f64, reason: String },

    #[error("initial point is off the energy surface: |K| = {residual:e}")]
    OffSurface { residual: f64 },

    #[error("initial point is off the section: residual {residual:e}")]
    OffSection { residual: f64 },

    #[error("energy drift bound exceeded at t = {t}: |K| = {residual:e} > {bound:e}")]
    Drift { t: f64, residual: f64, bound: f64 },

    #[error("trajectory approached the sun collision at t = {t}: |2v^2 - 1| = {distance:e}")]
    SingularityApproach { t: f64, distance: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("no crossing found before t = {t_max}")]
    NoCrossing { t_max: f64 },

    #[error("non-transversal section crossing at t = {t} (normal velocity {transversality:e})")]
    NonTransversal { t: f64, transversality: f64 },

    #[error("shooting function has no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("return map iterate {iterate}: {source}")]
    Iterate {
        iterate: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
