"""Non-homogeneous Markov measures on mixing subshifts of finite type."""

__version__ = "0.1.0"
