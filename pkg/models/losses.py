import numpy as np
import torch

# dense copies of X are cached up to this many entries
DENSE_CACHE_LIMIT = 50_000_000


class FrobeniusLoss:
    """Reconstruction error ||X - W H||_F (the norm, not its square).

    X is a scipy sparse matrix; the residual is formed densely in blocks of
    rows so the error is exact without materializing n x w at once.
    """
    def __init__(self, X, device=None, chunk_size=4096):
        self.X = X.tocsr()
        self.device = device if device is not None else torch.device('cpu')
        self.chunk_size = chunk_size
        self.blocks = None
        n, w = self.X.shape
        if n * w <= DENSE_CACHE_LIMIT:
            self.blocks = [self._block(start) for start in range(0, n, chunk_size)]

    def _block(self, start):
        stop = min(start + self.chunk_size, self.X.shape[0])
        dense = np.asarray(self.X[start:stop].toarray(), dtype=np.float64)
        return torch.from_numpy(dense).to(self.device)

    def __call__(self, W, H):
        total = torch.zeros((), dtype=torch.float64, device=self.device)
        for b, start in enumerate(range(0, self.X.shape[0], self.chunk_size)):
            block = self.blocks[b] if self.blocks is not None else self._block(start)
            residual = block - W[start:start + block.shape[0]] @ H
            total += torch.sum(residual * residual)
        return float(torch.sqrt(total))
