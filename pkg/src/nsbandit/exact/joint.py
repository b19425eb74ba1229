"""Dense joint distributions over named discrete variables."""
from __future__ import annotations

import numpy as np

from ..errors import NsBanditError

SUM_TOL = 1e-9


class QueryError(NsBanditError, KeyError):
    pass


class JointDist:
    """Probability table with one named axis per variable.

    ``labels[i]`` lists the value of variable ``names[i]`` at each index of
    axis ``i``.
    """

    def __init__(self, names, table, labels=None):
        self.names = tuple(names)
        self.table = np.asarray(table, dtype=np.float64)
        if self.table.ndim != len(self.names):
            raise ValueError(f"{len(self.names)} names for a {self.table.ndim}-d table")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names {self.names}")
        if abs(self.table.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"table sums to {self.table.sum()!r}")
        if labels is None:
            labels = [list(range(n)) for n in self.table.shape]
        self.labels = tuple(list(lab) for lab in labels)

    @classmethod
    def from_codes(cls, names, codes, weights):
        """Aggregate weighted samples ``codes[i][n]`` of each variable into a table."""
        weights = np.asarray(weights, dtype=np.float64)
        inv, labels = [], []
        for c in codes:
            c = np.asarray(c)
            u, idx = np.unique(c, axis=0, return_inverse=True) if c.ndim > 1 else np.unique(c, return_inverse=True)
            labels.append([tuple(x) if np.ndim(x) else x.item() for x in u])
            inv.append(idx.ravel())
        shape = tuple(len(lab) for lab in labels)
        table = np.zeros(shape)
        np.add.at(table, tuple(inv), weights)
        return cls(names, table / table.sum(), labels)

    def _axes(self, names):
        if isinstance(names, str):
            names = (names,)
        missing = [n for n in names if n not in self.names]
        if missing:
            raise QueryError(f"unknown variables {missing}; have {list(self.names)}")
        return [self.names.index(n) for n in names]

    def marginal(self, names):
        axes = self._axes(names)
        drop = tuple(i for i in range(len(self.names)) if i not in axes)
        m = self.table.sum(axis=drop) if drop else self.table
        keep = sorted(axes)
        m = np.transpose(m, [keep.index(a) for a in axes])
        return JointDist([self.names[a] for a in axes], m, [self.labels[a] for a in axes])

    def condition(self, name, value):
        (ax,) = self._axes(name)
        idx = self.labels[ax].index(value)
        sl = np.take(self.table, idx, axis=ax)
        z = sl.sum()
        if z <= 0:
            raise ValueError(f"conditioning on zero-probability event {name}={value!r}")
        names = self.names[:ax] + self.names[ax + 1:]
        labels = self.labels[:ax] + self.labels[ax + 1:]
        return JointDist(names, sl / z, labels)

    def pushforward(self, name, fn, new_name=None):
        """Replace variable ``name`` by ``fn(value)``."""
        (ax,) = self._axes(name)
        images = [fn(v) for v in self.labels[ax]]
        out_labels = sorted(set(images), key=repr)
        onehot = np.zeros((len(images), len(out_labels)))
        for i, v in enumerate(images):
            onehot[i, out_labels.index(v)] = 1.0
        t = np.moveaxis(np.tensordot(self.table, onehot, axes=([ax], [0])), -1, ax)
        names = list(self.names)
        names[ax] = new_name or name
        labels = list(self.labels)
        labels[ax] = out_labels
        return JointDist(names, t, labels)

    def prob(self, **assignment):
        idx = [slice(None)] * len(self.names)
        for name, value in assignment.items():
            (ax,) = self._axes(name)
            idx[ax] = self.labels[ax].index(value)
        return float(np.sum(self.table[tuple(idx)]))

    def grouped(self, x, y, given=()):
        """Table reshaped to ``(Z, X, Y)`` for the three variable groups."""
        gx, gy, gz = self._axes(x), self._axes(y), self._axes(given)
        if set(gx) & set(gy) or set(gx) & set(gz) or set(gy) & set(gz):
            raise QueryError("variable groups must be disjoint")
        m = self.marginal([self.names[i] for i in gz + gx + gy]).table
        nz = int(np.prod(m.shape[: len(gz)], dtype=np.int64))
        nx = int(np.prod(m.shape[len(gz): len(gz) + len(gx)], dtype=np.int64))
        return m.reshape(nz, nx, -1)

    def __repr__(self):
        return f"JointDist({list(self.names)}, shape={self.table.shape})"
