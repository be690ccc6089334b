"""Sparse assembly of bilinear elements, the clamped bending matrix and DOF maps.

Global DOF ``c*N + i*N3 + j`` for component ``c`` (0 -> u1, 1 -> u3) at
node ``(i, j)`` with ``N = N1*N3``.
"""
import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ValidationError


def _cell_nodes(grid):
    n1, n3 = grid.shape
    i, j = np.meshgrid(np.arange(n1 - 1), np.arange(n3 - 1), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    # local node a = 2*ia + ja
    return np.stack([i * n3 + j, i * n3 + j + 1, (i + 1) * n3 + j, (i + 1) * n3 + j + 1], axis=1)


def _cell_sizes(grid):
    hx, hz = np.meshgrid(grid.h1, grid.h3, indexing="ij")
    return hx.ravel(), hz.ravel()


def _coo(blocks, dofs, n):
    nb = dofs.shape[1]
    rows = np.repeat(dofs, nb, axis=1).ravel()
    cols = np.tile(dofs, (1, nb)).ravel()
    return sp.csr_matrix((blocks.ravel(), (rows, cols)), shape=(n, n))


def assemble_stiffness(grid, lam, mu, memb=None):
    """Plane-strain stiffness with per-cell Lamé fields of shape (N1-1, N3-1).

    ``memb`` adds ``memb * d1u1 * d1v1`` per cell (layer membrane term).
    """
    nc = (grid.shape[0] - 1) * (grid.shape[1] - 1)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (nc,)) if np.ndim(lam) == 0 else np.ravel(lam)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (nc,)) if np.ndim(mu) == 0 else np.ravel(mu)
    memb = np.zeros(nc) if memb is None else np.broadcast_to(np.ravel(np.asarray(memb, dtype=float)), (nc,))
    hx, hz = _cell_sizes(grid)
    ke = kernels.q1_element_stiffness(hx, hz, lam, mu, memb)
    nodes = _cell_nodes(grid)
    N = grid.n_nodes
    dofs = np.concatenate([nodes, nodes + N], axis=1)
    return _coo(ke, dofs, 2 * N)


def assemble_scalar_mass(grid, rho):
    nc = (grid.shape[0] - 1) * (grid.shape[1] - 1)
    rho = np.broadcast_to(np.ravel(np.asarray(rho, dtype=float)), (nc,))
    hx, hz = _cell_sizes(grid)
    me = kernels.q1_element_mass(hx, hz, rho)
    return _coo(me, _cell_nodes(grid), grid.n_nodes)


def assemble_mass(grid, rho):
    """Consistent mass for both displacement components."""
    return sp.block_diag([assemble_scalar_mass(grid, rho)] * 2, format="csr")


def second_difference_clamped(n, h):
    """Centered second difference with ghost reflection u_{-1}=u_1, u_n=u_{n-2}."""
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    D = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    D[0, 1] = 2.0
    D[n - 1, n - 2] = 2.0
    return D.tocsr() / h**2


def bending_matrix_1d(x1):
    """Clamped discrete form sum_i w_i (D2 u)_i (D2 v)_i on a uniform x1 grid."""
    h = np.diff(x1)
    if not np.allclose(h, h[0], rtol=1e-10):
        raise ValidationError("bending operator needs a uniform x1 grid")
    D2 = second_difference_clamped(x1.size, h[0])
    w = np.full(x1.size, h[0])
    w[[0, -1]] = 0.5 * h[0]
    return (D2.T @ sp.diags(w) @ D2).tocsr()


def assemble_bending(grid, weight3):
    """Bending term on u3: kron(B1, diag(weight3)) where weight3 lives on x3 nodes."""
    B1 = bending_matrix_1d(grid.x1)
    Bs = sp.kron(B1, sp.diags(np.asarray(weight3, dtype=float)), format="csr")
    z = sp.csr_matrix((grid.n_nodes, grid.n_nodes))
    return sp.bmat([[z, None], [None, Bs]], format="csr")


def cell_to_node_x3(cell_values):
    """Average adjacent-cell values onto x3 nodes (one-sided at the ends)."""
    c = np.asarray(cell_values, dtype=float)
    out = np.empty(c.size + 1)
    out[0] = c[0]
    out[-1] = c[-1]
    out[1:-1] = 0.5 * (c[1:] + c[:-1])
    return out


class DofMap:
    """Maps free unknowns onto the full nodal vector.

    Dirichlet nodes and ``constrained`` DOFs (bool array shaped like a plane
    field) are eliminated; with ``periodic_x1`` the last x1 column is slaved
    to the first.
    """

    def __init__(self, grid, dirichlet_x1=True, dirichlet_x3=True, constrained=None):
        n1, n3 = grid.shape
        self.grid = grid
        self.periodic = grid.periodic_x1
        fixed = np.zeros((2, n1, n3), dtype=bool)
        if dirichlet_x3:
            fixed[:, :, [0, -1]] = True
        if dirichlet_x1 and not self.periodic:
            fixed[:, [0, -1], :] = True
        if constrained is not None:
            fixed |= np.asarray(constrained, dtype=bool)
        master = np.arange(n1)
        if self.periodic:
            master[-1] = 0
            fixed[:, 0, :] |= fixed[:, -1, :]
            fixed[:, -1, :] = fixed[:, 0, :]
        owner = np.zeros((2, n1, n3), dtype=bool)
        owner[:, master == np.arange(n1), :] = True
        free_owner = owner & ~fixed
        col = -np.ones((2, n1, n3), dtype=np.int64)
        col[free_owner] = np.arange(int(free_owner.sum()))
        col = col[:, master, :]
        col[fixed] = -1
        self.fixed = fixed
        self.col = col
        self.n_free = int(free_owner.sum())
        rows = np.flatnonzero(col.ravel() >= 0)
        self.P = sp.csr_matrix(
            (np.ones(rows.size), (rows, col.ravel()[rows])), shape=(col.size, self.n_free)
        )

    def expand(self, uf):
        """Free vector (or batch of columns) -> full plane field(s)."""
        uf = np.asarray(uf)
        full = self.P @ uf
        if uf.ndim == 1:
            return full.reshape((2,) + self.grid.shape)
        return full

    def restrict(self, F):
        """Full load vector -> free load (sums periodic duplicates)."""
        return self.P.T @ np.ravel(F)

    def pick(self, u):
        """Free-DOF values of a full field (no summation)."""
        u = np.ravel(u)
        out = np.zeros(self.n_free)
        c = self.col.ravel()
        m = c >= 0
        out[c[m]] = u[m]
        return out

    def reduce(self, A):
        return (self.P.T @ A @ self.P).tocsc()
