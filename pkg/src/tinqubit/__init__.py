"""Error-budget simulator for hyperfine e-n-CPhase gates with Sn/Si nuclei in silicon quantum dots."""

__version__ = "0.1.0"
