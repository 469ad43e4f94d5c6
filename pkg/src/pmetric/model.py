"""Probabilistic labelled transition systems and their JSON model format.

A model is a finite set of states and actions together with transitions
``source --action--> distribution``, where every transition target is a full
(mass-1) probability distribution over states.  Subdistributions (mass <= 1)
appear as derived values in the distribution-based computations; the empty
subdistribution plays the role of a null successor there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ModelError

# Absolute tolerance for probability comparisons throughout the package.
PROB_TOL = 1e-9
# Tighter tolerance used for canonical equality / deduplication of
# subdistributions (entry-wise).
CANON_TOL = 1e-12
# Decimal places used to build canonical hash keys, matching CANON_TOL.
_KEY_DECIMALS = 12


class SubDistribution:
    """Finitely supported map state -> probability with total mass <= 1.

    Entries are kept in a canonical order (lexicographic by state name) with
    explicit zeros dropped, so that iteration order, equality and hash keys
    are reproducible.  Instances are immutable.
    """

    __slots__ = ("_items", "_mass", "_key")

    def __init__(self, entries):
        items = []
        for state, prob in sorted(dict(entries).items()):
            if prob < -CANON_TOL:
                raise ValueError(f"negative probability {prob!r} for state {state!r}")
            if prob > CANON_TOL:
                items.append((state, float(prob)))
        mass = 0.0
        for _, prob in items:
            mass += prob
        if mass > 1.0 + PROB_TOL:
            raise ValueError(f"subdistribution mass {mass!r} exceeds 1")
        self._items = tuple(items)
        self._mass = mass
        self._key = tuple((s, round(p, _KEY_DECIMALS)) for s, p in items)

    @property
    def items(self):
        """Entries as (state, probability) pairs in canonical order."""
        return self._items

    @property
    def support(self):
        return tuple(s for s, _ in self._items)

    @property
    def mass(self):
        return self._mass

    @property
    def key(self):
        """Hashable canonical key; equal keys mean equal within CANON_TOL."""
        return self._key

    def __call__(self, state):
        for s, p in self._items:
            if s == state:
                return p
        return 0.0

    def __eq__(self, other):
        if not isinstance(other, SubDistribution):
            return NotImplemented
        if self.support != other.support:
            return False
        return all(abs(p - q) <= CANON_TOL for (_, p), (_, q) in zip(self._items, other._items))

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{s}: {p:g}" for s, p in self._items)
        return "{" + body + "}"

    def is_full(self, tol=PROB_TOL):
        return abs(self._mass - 1.0) <= tol

    def scale(self, factor):
        return SubDistribution({s: p * factor for s, p in self._items})


#: The zero-mass subdistribution.
EPSILON = SubDistribution({})


def dirac(state) -> SubDistribution:
    """Mass-1 subdistribution concentrated on a single state."""
    return SubDistribution({state: 1.0})


def mix(weighted) -> SubDistribution:
    """Convex combination ``sum w_i * dist_i`` of (weight, SubDistribution) pairs."""
    acc = {}
    for weight, dist in weighted:
        for s, p in dist.items:
            acc[s] = acc.get(s, 0.0) + weight * p
    return SubDistribution(acc)


@dataclass(frozen=True)
class Transition:
    source: str
    action: str
    target: SubDistribution


class Plts:
    """Immutable probabilistic labelled transition system.

    State and action order is the declaration order of the model file; all
    tables and iterations in the package follow it.
    """

    def __init__(self, states, actions, transitions):
        self.states = tuple(states)
        self.actions = tuple(actions)
        self.transitions = tuple(transitions)
        self.state_index = {s: i for i, s in enumerate(self.states)}
        self.action_index = {a: i for i, a in enumerate(self.actions)}
        self._validate()
        succ = {}
        for tr in self.transitions:
            succ.setdefault((tr.source, tr.action), []).append(tr.target)
        self._succ = {k: tuple(v) for k, v in succ.items()}

    def _validate(self):
        if len(self.state_index) != len(self.states):
            raise ModelError("duplicate state identifier in state list")
        if len(self.action_index) != len(self.actions):
            raise ModelError("duplicate action identifier in action list")
        for i, tr in enumerate(self.transitions):
            where = f"transition #{i} ({tr.source!r} --{tr.action!r}-->)"
            if tr.source not in self.state_index:
                raise ModelError(f"{where}: undeclared source state {tr.source!r}")
            if tr.action not in self.action_index:
                raise ModelError(f"{where}: undeclared action {tr.action!r}")
            for s in tr.target.support:
                if s not in self.state_index:
                    raise ModelError(f"{where}: undeclared target state {s!r}")
            if not tr.target.is_full():
                raise ModelError(
                    f"{where}: target mass {tr.target.mass!r} differs from 1 "
                    f"beyond tolerance {PROB_TOL}"
                )

    def successors(self, state, action):
        """All action-successor distributions of a state, in transition order."""
        if state not in self.state_index:
            raise ModelError(f"unknown state {state!r}")
        if action not in self.action_index:
            raise ModelError(f"unknown action {action!r}")
        return self._succ.get((state, action), ())

    def enabled_actions(self, state):
        return tuple(a for a in self.actions if (state, a) in self._succ)

    @property
    def num_states(self):
        return len(self.states)

    def __repr__(self):
        return (
            f"Plts(|S|={len(self.states)}, |A|={len(self.actions)}, "
            f"|->|={len(self.transitions)})"
        )


def successors(model: Plts, state, action):
    return model.successors(state, action)


def parse_model(text: str) -> Plts:
    """Parse and validate the JSON model format.

    Expected shape::

        { "states": ["s", ...], "actions": ["a", ...],
          "transitions": [ {"from": "s", "action": "a", "to": {"s1": 1.0}}, ... ] }
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(
            f"model syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            position=exc.pos,
        ) from exc
    if not isinstance(raw, dict):
        raise ModelError("model file must contain a JSON object")
    for key in ("states", "actions", "transitions"):
        if key not in raw:
            raise ModelError(f"model file is missing the {key!r} field")
    states = raw["states"]
    actions = raw["actions"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ModelError("'states' must be a list of strings")
    if not isinstance(actions, list) or not all(isinstance(a, str) for a in actions):
        raise ModelError("'actions' must be a list of strings")
    transitions = []
    for i, entry in enumerate(raw["transitions"]):
        if not isinstance(entry, dict):
            raise ModelError(f"transition #{i} must be an object")
        try:
            source = entry["from"]
            action = entry["action"]
            target = entry["to"]
        except KeyError as exc:
            raise ModelError(f"transition #{i} is missing field {exc.args[0]!r}") from exc
        if not isinstance(target, dict):
            raise ModelError(f"transition #{i}: 'to' must map states to probabilities")
        try:
            dist = SubDistribution({s: float(p) for s, p in target.items()})
        except ValueError as exc:
            raise ModelError(f"transition #{i}: {exc}") from exc
        transitions.append(Transition(source, action, dist))
    return Plts(states, actions, transitions)


def serialize(model: Plts) -> str:
    """Render a model back to its JSON format (inverse of parse_model)."""
    payload = {
        "states": list(model.states),
        "actions": list(model.actions),
        "transitions": [
            {"from": tr.source, "action": tr.action, "to": dict(tr.target.items)}
            for tr in model.transitions
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def load_model(path) -> Plts:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())
