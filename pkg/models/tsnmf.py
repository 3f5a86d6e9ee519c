"""Topic-supervised NMF: min ||X - (W * L) H||_F with W, H >= 0.

L is the binary constraint matrix, `*` the element-wise product. Plain NMF is
the case L = all ones and is also available as its own unmasked code path.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.sparse as sp
import torch

from models.losses import FrobeniusLoss
from optimizer import get_update_rule
from utils import get_device, load_json, read_coordinate, save_json, write_coordinate


@dataclass(frozen=True)
class SolverConfig:
    k: int = 80
    max_iter: int = 200
    tol: float = 1e-4
    epsilon: float = 1e-12
    seed: int = 42
    device: str = 'cpu'

    def __post_init__(self):
        if self.k < 1:
            raise ValueError('k must be >= 1, got {}'.format(self.k))
        if self.max_iter < 1:
            raise ValueError('max_iter must be >= 1, got {}'.format(self.max_iter))
        if not self.tol > 0:
            raise ValueError('tol must be positive, got {}'.format(self.tol))
        if not self.epsilon > 0:
            raise ValueError('epsilon must be positive, got {}'.format(self.epsilon))


@dataclass
class Factorization:
    W: np.ndarray
    H: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False

    @property
    def k(self):
        return self.W.shape[1]

    @property
    def final_objective(self):
        return self.objective_trace[-1] if self.objective_trace else float('nan')


def _sparse_tensor(X, device):
    coo = sp.coo_matrix(X)
    indices = torch.from_numpy(np.vstack([coo.row, coo.col]).astype(np.int64))
    values = torch.from_numpy(coo.data.astype(np.float64))
    return torch.sparse_coo_tensor(indices, values, coo.shape, dtype=torch.float64, device=device).coalesce()


def _mask_array(L, n, k):
    entries = L.entries if hasattr(L, 'entries') else np.asarray(L, dtype=np.float64)
    if entries.shape != (n, k):
        raise ValueError('constraint matrix is {}, expected {}'.format(entries.shape, (n, k)))
    return entries


def init_factors(X, L, config):
    """Seeded uniform factors scaled by sqrt(mean(X)/k), W masked by L."""
    n, w, k = X.n, X.w, config.k
    entries = _mask_array(L, n, k)
    scale = math.sqrt(float(X.entries.sum()) / (n * w) / k)
    generator = torch.Generator().manual_seed(config.seed)
    W0 = torch.rand((n, k), generator=generator, dtype=torch.float64) * scale
    H0 = torch.rand((k, w), generator=generator, dtype=torch.float64) * scale
    W0 = W0 * torch.from_numpy(entries)
    return W0.numpy(), H0.numpy()


def objective(X, W, L, H):
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if W.ndim != 2 or H.ndim != 2 or W.shape[0] != X.n or H.shape[1] != X.w or W.shape[1] != H.shape[0]:
        raise ValueError('dimension mismatch: X {}, W {}, H {}'.format((X.n, X.w), W.shape, H.shape))
    entries = _mask_array(L, W.shape[0], W.shape[1])
    loss = FrobeniusLoss(X.entries)
    return loss(torch.from_numpy(W * entries), torch.from_numpy(H))


def _solve(X, mask, config, rule, init, callback):
    device = get_device(config.device)
    n, k = X.n, config.k
    if init is None:
        init = init_factors(X, mask if mask is not None else np.ones((n, k)), config)
    W = torch.tensor(np.asarray(init[0], dtype=np.float64), device=device)
    H = torch.tensor(np.asarray(init[1], dtype=np.float64), device=device)
    if W.shape != (n, k) or H.shape != (k, X.w):
        raise ValueError('initial factors have shapes {} and {}'.format(tuple(W.shape), tuple(H.shape)))
    L = torch.from_numpy(_mask_array(mask, n, k)).to(device) if mask is not None else None

    Xs = _sparse_tensor(X.entries, device)
    Xt = _sparse_tensor(X.entries.T, device)
    loss = FrobeniusLoss(X.entries, device)
    update = get_update_rule(rule)

    previous = loss(W if L is None else W * L, H)
    trace, converged = [], False
    for it in range(1, config.max_iter + 1):
        W, H = update(Xs, Xt, W, H, L, config.epsilon)
        value = loss(W if L is None else W * L, H)
        if not math.isfinite(value) or not bool(torch.isfinite(W).all()) or not bool(torch.isfinite(H).all()):
            raise FloatingPointError('non-finite value in factorization at iteration {}'.format(it))
        trace.append(value)
        if callback is not None:
            callback(it, W.cpu().numpy(), H.cpu().numpy())
        change = abs(previous - value) / previous if previous > 0 else 0.0
        previous = value
        if change < config.tol:
            converged = True
            break
    logging.info('%s NMF k=%d: %d iterations, objective %.6f, converged %s',
                 rule, k, len(trace), trace[-1], converged)
    return Factorization(W=W.cpu().numpy(), H=H.cpu().numpy(), objective_trace=trace,
                         iterations_run=len(trace), converged=converged)


def fit(X, L, config, init=None, callback=None):
    """Masked multiplicative updates until relative change < tol or max_iter.

    Args:
        init: optional (W0, H0); defaults to init_factors(X, L, config).
        callback: called as callback(iteration, W, H) after every update.
    """
    if L.n != X.n or L.k != config.k:
        raise ValueError('constraint matrix is {}x{}, expected {}x{}'.format(L.n, L.k, X.n, config.k))
    return _solve(X, L, config, 'masked', init, callback)


def fit_nmf(X, config, init=None, callback=None):
    return _solve(X, None, config, 'plain', init, callback)


def write_factorization(fact, out_dir, name):
    """W_<name>.mtx, H_<name>.mtx and fit_<name>.json in out_dir."""
    write_coordinate(fact.W, '{}/W_{}.mtx'.format(out_dir, name))
    write_coordinate(fact.H, '{}/H_{}.mtx'.format(out_dir, name))
    save_json({'k': fact.k,
               'iterations_run': fact.iterations_run,
               'converged': fact.converged,
               'objective_trace': [float(v) for v in fact.objective_trace]},
              '{}/fit_{}.json'.format(out_dir, name))


def read_factorization(out_dir, name):
    meta = load_json('{}/fit_{}.json'.format(out_dir, name))
    W = read_coordinate('{}/W_{}.mtx'.format(out_dir, name)).toarray()
    H = read_coordinate('{}/H_{}.mtx'.format(out_dir, name)).toarray()
    return Factorization(W=W, H=H, objective_trace=list(meta['objective_trace']),
                         iterations_run=meta['iterations_run'], converged=meta['converged'])
