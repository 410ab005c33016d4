"""
Various global variables that are static and used throughout the program.
"""

# tensor_autodiff
FD_STEP = 1e-6
GRADCHECK_RTOL = 1e-5

# nn_layers
DEFAULT_LEAKY_SLOPE = 0.2
CHECKPOINT_MAGIC = b"GDL1"

# losses
DISTRIBUTION_TOL = 1e-9
DEFAULT_HUBER_DELTA = 1.0

# fisher_infogeo
RANK_RTOL = 1e-8
HESSIAN_FD_STEP = 1e-5
MAX_DENSE_FISHER_PARAMS = 2048
MAX_HESSIAN_PARAMS = 256
EXPECTATION_TOL = 1e-9
COVARIANCE_TOL = 1e-9
HESSIAN_TOL = 1e-6

# datasets_io
DATA_DIR_ENV_VAR = "GDLKIT_DATA_DIR"

# cli
CHECK_FAILED_EXIT = 4
