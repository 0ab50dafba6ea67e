"""Transient probe absorption of degenerate two-level transitions."""

try:
    from . import _dtls as _ext
except ImportError:  # build tree: the extension sits next to the package
    import _dtls as _ext

ConfigError = _ext.ConfigError
IoError = _ext.IoError
NumericError = _ext.NumericError
LambdaParams = _ext.LambdaParams
NParams = _ext.NParams
__version__ = _ext.__version__

clebsch_gordan = _ext.clebsch_gordan
lowering_operators = _ext.lowering_operators
f_function = _ext.f_function
lambda_nonlinear_absorption = _ext.lambda_nonlinear_absorption
lambda_steady_absorption = _ext.lambda_steady_absorption
lambda_exact_nonlinear_absorption = _ext.lambda_exact_nonlinear_absorption
n_nonlinear_absorption = _ext.n_nonlinear_absorption
n_steady_absorption = _ext.n_steady_absorption
scan = _ext.scan
fwhm = _ext.fwhm
parse_config = _ext.parse_config
compute = _ext.compute
run = _ext.run
