import torch


def masked_update(X, Xt, W, H, L, eps):
    """One round of Lee-Seung Frobenius updates with W confined to the mask L.

    X and Xt are the sparse data matrix and its transpose, W is n x k, H is
    k x w, and eps guards every denominator entry.
    """
    W = W * torch.sparse.mm(X, H.t()) / (W @ (H @ H.t()) + eps) * L
    H = H * torch.sparse.mm(Xt, W).t() / ((W.t() @ W) @ H + eps)
    return W, H


def plain_update(X, Xt, W, H, L, eps):
    W = W * torch.sparse.mm(X, H.t()) / (W @ (H @ H.t()) + eps)
    H = H * torch.sparse.mm(Xt, W).t() / ((W.t() @ W) @ H + eps)
    return W, H


def get_update_rule(name):
    if name == 'masked':
        update_rule = masked_update
    elif name == 'plain':
        update_rule = plain_update
    else:
        raise ValueError('unknown update rule {!r}'.format(name))
    return update_rule
