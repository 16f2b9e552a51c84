"""Grid worlds: FrozenLake, CliffWalking and the 3x3 Maze."""

from __future__ import annotations

from importlib import resources

from . import constants as C
from .base import Discrete, Env, EnvSpec

# FrozenLake action order: Left, Down, Right, Up
_FL_MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))
# CliffWalking action order: Up, Right, Down, Left
_CW_MOVES = ((-1, 0), (0, 1), (1, 0), (0, -1))
# Maze action order: Up, Down, Right, Left
_MAZE_MOVES = ((-1, 0), (1, 0), (0, 1), (0, -1))


class FrozenLake(Env):
    """Slippery 4x4 lake. The chosen direction or either perpendicular one, each w.p. 1/3."""

    spec = EnvSpec("frozen-lake", obs_dim=16, action_space=Discrete(4),
                   max_steps=C.FROZEN_LAKE_MAX_STEPS, obs_kind="index", n_states=16)

    def __init__(self, slippery: bool = True):
        super().__init__()
        self.slippery = slippery
        self.desc = C.FROZEN_LAKE_MAP
        self.nrow, self.ncol = len(self.desc), len(self.desc[0])
        self.state = 0

    def tile(self, state: int) -> str:
        return self.desc[state // self.ncol][state % self.ncol]

    def move(self, state: int, direction: int) -> int:
        r, c = divmod(state, self.ncol)
        dr, dc = _FL_MOVES[direction]
        r = min(max(r + dr, 0), self.nrow - 1)
        c = min(max(c + dc, 0), self.ncol - 1)
        return r * self.ncol + c

    def _reset(self):
        self.state = 0
        return self.state

    def _step(self, action):
        if self.slippery:
            direction = (action - 1 + min(int(self.rng.random() * 3), 2)) % 4
        else:
            direction = action
        self.state = self.move(self.state, direction)
        tile = self.tile(self.state)
        return self.state, (1.0 if tile == "G" else 0.0), tile in "GH"


class CliffWalking(Env):
    """4x12 cliff grid, deterministic moves; the cliff costs -100 and sends the agent back to start."""

    spec = EnvSpec("cliff-walking", obs_dim=48, action_space=Discrete(4),
                   max_steps=C.CLIFF_MAX_STEPS, obs_kind="index", n_states=48)

    def __init__(self):
        super().__init__()
        self.state = C.CLIFF_START

    @staticmethod
    def is_cliff(state: int) -> bool:
        r, c = divmod(state, C.CLIFF_COLS)
        return r == C.CLIFF_ROWS - 1 and 0 < c < C.CLIFF_COLS - 1

    @staticmethod
    def move(state: int, action: int) -> int:
        r, c = divmod(state, C.CLIFF_COLS)
        dr, dc = _CW_MOVES[action]
        r = min(max(r + dr, 0), C.CLIFF_ROWS - 1)
        c = min(max(c + dc, 0), C.CLIFF_COLS - 1)
        return r * C.CLIFF_COLS + c

    def _reset(self):
        self.state = C.CLIFF_START
        return self.state

    def _step(self, action):
        nxt = self.move(self.state, action)
        if self.is_cliff(nxt):
            self.state = C.CLIFF_START
            return self.state, C.CLIFF_PENALTY, False
        self.state = nxt
        return self.state, -1.0, nxt == C.CLIFF_GOAL


def load_maze(text: str):
    """Parse an ASCII maze into (nrow, ncol, start, goal, open_edges)."""
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith(";")]
    nrow, ncol = (len(rows) - 1) // 2, (len(rows[0]) - 1) // 2
    start = goal = None
    edges = set()
    for r in range(nrow):
        for c in range(ncol):
            s = r * ncol + c
            ch = rows[2 * r + 1][2 * c + 1]
            if ch == "S":
                start = s
            elif ch == "G":
                goal = s
            if c + 1 < ncol and rows[2 * r + 1][2 * c + 2] == " ":
                edges.add(frozenset((s, s + 1)))
            if r + 1 < nrow and rows[2 * r + 2][2 * c + 1] == " ":
                edges.add(frozenset((s, s + ncol)))
    if start is None or goal is None:
        raise ValueError("maze needs one S and one G cell")
    return nrow, ncol, start, goal, frozenset(edges)


class Maze(Env):
    """3x3 maze from a text asset. Bumping into a wall leaves the agent in place."""

    spec = EnvSpec("maze", obs_dim=9, action_space=Discrete(4),
                   max_steps=C.MAZE_MAX_STEPS, obs_kind="index", n_states=9)

    def __init__(self, layout: str | None = None):
        super().__init__()
        if layout is None:
            layout = resources.files(__package__).joinpath("assets/maze_3x3.txt").read_text()
        self.nrow, self.ncol, self.start, self.goal, self.edges = load_maze(layout)
        self.state = self.start

    def move(self, state: int, action: int) -> int:
        r, c = divmod(state, self.ncol)
        dr, dc = _MAZE_MOVES[action]
        nr, nc = r + dr, c + dc
        if not (0 <= nr < self.nrow and 0 <= nc < self.ncol):
            return state
        nxt = nr * self.ncol + nc
        return nxt if frozenset((state, nxt)) in self.edges else state

    def _reset(self):
        self.state = self.start
        return self.state

    def _step(self, action):
        self.state = self.move(self.state, action)
        if self.state == self.goal:
            return self.state, C.MAZE_GOAL_REWARD, True
        return self.state, C.MAZE_STEP_REWARD, False
