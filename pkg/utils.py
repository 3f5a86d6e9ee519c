import hashlib
import json
import logging
import os
import random

import gpustat
import numpy as np
import scipy.sparse as sp
import torch
import wandb


def setup_logging(log_file=None):
    """Setup logging configuration
    """
    root = logging.getLogger('')
    for handler in list(root.handlers):
        root.removeHandler(handler)
    if log_file is not None:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        logging.basicConfig(level=logging.INFO,
                            format="%(asctime)s - %(levelname)s - %(message)s",
                            datefmt="%Y-%m-%d %H:%M:%S",
                            filename=log_file,
                            filemode='w')
    else:
        root.setLevel(logging.INFO)
    # StreamHandler writes to stderr, results only go to files
    console = logging.StreamHandler()
    console.setLevel(logging.INFO)
    formatter = logging.Formatter(fmt="%(asctime)s %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
    console.setFormatter(formatter)
    root.addHandler(console)


def setup_gpus():
    """Adapted from https://github.com/bamos/setGPU/blob/master/setGPU.py
    """
    stats = gpustat.GPUStatCollection.new_query()
    ids = map(lambda gpu: int(gpu.entry['index']), stats)
    ratios = map(lambda gpu: float(gpu.entry['memory.used']) / float(gpu.entry['memory.total']), stats)
    pairs = list(zip(ids, ratios))
    random.shuffle(pairs)
    best_gpu = min(pairs, key=lambda x: x[1])[0]
    return best_gpu


def get_device(name):
    if name == 'cpu':
        return torch.device('cpu')
    elif name == 'cuda':
        best_gpu = setup_gpus()
        torch.cuda.set_device(best_gpu)
        return torch.device('cuda:{}'.format(best_gpu))
    raise ValueError('unknown device {!r}'.format(name))


def seed_everything(seed: int):
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


def format_float(value):
    # repr round-trips exactly, keeps artifacts byte-stable
    return repr(float(value))


def write_coordinate(matrix, path):
    """Write a matrix as `n w nnz` header followed by `row col value` lines.

    Accepts scipy sparse matrices and dense arrays; zeros are not written.
    """
    coo = sp.coo_matrix(matrix)
    coo.sum_duplicates()
    order = np.lexsort((coo.col, coo.row))
    rows, cols, vals = coo.row[order], coo.col[order], coo.data[order]
    keep = vals != 0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    with open(path, 'w', encoding='utf-8') as f:
        f.write('{} {} {}\n'.format(coo.shape[0], coo.shape[1], len(vals)))
        for r, c, v in zip(rows, cols, vals):
            f.write('{} {} {}\n'.format(int(r), int(c), format_float(v)))


def read_coordinate(path):
    """Inverse of write_coordinate, returns a CSR matrix."""
    with open(path, encoding='utf-8') as f:
        header = f.readline().split()
        if len(header) != 3:
            raise ValueError('{}: bad coordinate header'.format(path))
        n, w, nnz = map(int, header)
        rows, cols, vals = [], [], []
        for line in f:
            r, c, v = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    if len(vals) != nnz:
        raise ValueError('{}: expected {} entries, found {}'.format(path, nnz, len(vals)))
    return sp.csr_matrix((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(n, w))


def save_json(obj, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')


def load_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def file_checksum(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def log_fit_end(name, factorization, prefix=''):
    """Push an objective trace to wandb, one step per iteration."""
    for it, value in enumerate(factorization.objective_trace):
        wandb.log({prefix + f'objective_{name}': value, "iteration": it})
    wandb.log({prefix + f'converged_{name}': int(factorization.converged),
               prefix + f'iterations_{name}': factorization.iterations_run})
