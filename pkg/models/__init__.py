from .tsnmf import Factorization, SolverConfig, fit, fit_nmf, init_factors, objective
