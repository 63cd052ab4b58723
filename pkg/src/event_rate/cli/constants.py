EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ZENO = 3

MODE_SCALAR_REAL = "scalar-real"
MODE_SCALAR_COMPLEX = "scalar-complex"
MODE_PENDULUM = "pendulum"
MODE_CUSTOM_VECTOR = "custom-vector"

MODES = (
    MODE_SCALAR_REAL,
    MODE_SCALAR_COMPLEX,
    MODE_PENDULUM,
    MODE_CUSTOM_VECTOR,
)

TRAJECTORY_CSV = "trajectory.csv"
EVENTS_CSV = "events.csv"
SUMMARY_JSON = "summary.json"
BOUNDS_CSV = "bounds.csv"
SWEEP_CSV = "sweep.csv"
ADVERSARY_DELAYS_CSV = "adversary_delays.csv"
ADVERSARY_DISTURBANCE_CSV = "adversary_disturbance.csv"
ADVERSARY_REPORT_JSON = "adversary_report.json"

EVENTS_COLUMNS = ("k", "t_s", "t_c", "delay", "g_bits", "z_post_jump")
TRAJECTORY_COLUMNS = ("t", "u")
BOUNDS_COLUMNS = (
    "gamma",
    "suff_bits",
    "practical_bits",
    "suff_rate",
    "nec_bits",
    "nec_rate_general",
    "nec_rate_restricted",
    "trig_upper",
    "trig_lower_restricted",
    "beta",
    "datarate",
)
SWEEP_COLUMNS = (
    "gamma",
    "seed",
    "g_bits",
    "n_events",
    "trig_rate",
    "realized_rate",
    "max_abs_z",
    "max_abs_x",
    "invariants_ok",
)
