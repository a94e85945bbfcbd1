from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dynamic_graph import streams


@dataclass
class UniformWindow:
    """
    Backward window of per-edge uniforms U_t^e for t = 0, -1, -2, ...

    Every cell is a pure function of (seed, edge, time); rows are generated
    on first read and cached for the current pass.
    """

    seed: int
    n_edges: int
    _rows: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    consumed: int = 0

    def row(self, time: int) -> np.ndarray:
        cached = self._rows.get(time)
        if cached is None:
            cached = streams.edge_uniforms(self.seed, streams.CFTP, time, self.n_edges)
            cached.setflags(write=False)
            self._rows[time] = cached
            self.consumed += self.n_edges
        return cached

    def cell(self, edge: int, time: int) -> float:
        return float(self.row(time)[edge])

    def release_above(self, time: int):
        """Drop cached rows at times > time; later passes never read them."""
        for t in [t for t in self._rows if t > time]:
            del self._rows[t]
