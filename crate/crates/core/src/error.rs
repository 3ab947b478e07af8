use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid curve: {0}")]
    Validation(String),

    #[error("resample spacing {spacing} must be positive and below a third of the curve length {total_length}")]
    ResampleSpacing { spacing: f64, total_length: f64 },

    #[error("point lies on component {component} (segment {segment}, distance {distance:.3e})")]
    OnCurve {
        component: usize,
        segment: usize,
        distance: f64,
    },

    #[error("linking integral {value:.6} is {residual:.3e} from an integer; refine the curves")]
    Resolution { value: f64, residual: f64 },

    #[error("projection has a cusp at arclength {arclength:.6} (viewpoint on a tangent line)")]
    Cusp { arclength: f64 },

    #[error("tangent at arclength {arclength:.6} is antipodal to the reference axis; choose another axis")]
    AntipodalTangent { arclength: f64 },

    #[error("degenerate spherical projection: {0}; perturb the evaluation point")]
    Degenerate(String),

    #[error("point is on the surface of discontinuity: {0}")]
    DiscontinuitySurface(String),

    #[error("no admissible Dirac-string axis for component {component}: vertex {vertex} is antipodal to every candidate")]
    AxisExhausted { component: usize, vertex: usize },

    #[error("framing offset {eps} is too large: {reason}")]
    FramingOffset { eps: f64, reason: String },

    #[error("solid angle root bracketing failed at vertex {vertex}: {reason}")]
    Bracketing { vertex: usize, reason: String },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
