"""
Réseaux de Petri liés à des événements de signaux et moniteur de franchissement.

Un moniteur observe les changements de signaux (types d'événements 1 à 4), tire la
transition associée si elle est franchissable et lève un drapeau de faute (verrouillé)
sinon. En fin de simulation, `finalize` compare la dernière transition tirée à la
transition finale attendue.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from src.models.schemas import Detection
from src.models.signals import SignalRef
from src.utils.errors import ConfigurationError, ContractViolationError


class Marking(Mapping[str, int]):
    """Marquage immuable : nombre de jetons par place."""

    __slots__ = ("_places", "_tokens", "_hash")

    def __init__(self, tokens: Mapping[str, int]):
        for place, count in tokens.items():
            if count < 0:
                raise ConfigurationError(f"Marquage négatif pour {place} : {count}")
        self._places = tuple(tokens)
        self._tokens = dict(tokens)
        self._hash: Optional[int] = None

    def __getitem__(self, place: str) -> int:
        return self._tokens[place]

    def __iter__(self) -> Iterator[str]:
        return iter(self._places)

    def __len__(self) -> int:
        return len(self._places)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Marking):
            return self._tokens == other._tokens
        if isinstance(other, Mapping):
            return self._tokens == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._tokens.items())))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{n}" for p, n in self._tokens.items())
        return f"Marking({{{inner}}})"

    def total(self) -> int:
        return sum(self._tokens.values())


@dataclass(frozen=True)
class PetriNet:
    """Graphe biparti places/transitions avec marquage initial."""

    name: str
    places: Tuple[str, ...]
    transitions: Tuple[str, ...]
    arcs: Tuple[Tuple[str, str], ...]
    m0: Marking
    expected_final: Optional[str] = None
    capacity: int = 1
    pre: Dict[str, Tuple[str, ...]] = field(init=False, repr=False, compare=False)
    post: Dict[str, Tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        places, transitions = set(self.places), set(self.transitions)
        if len(places) != len(self.places) or len(transitions) != len(self.transitions):
            raise ConfigurationError(f"{self.name} : identifiant de place ou transition dupliqué")
        if places & transitions:
            raise ConfigurationError(f"{self.name} : une place et une transition partagent un nom")
        pre: Dict[str, List[str]] = {t: [] for t in self.transitions}
        post: Dict[str, List[str]] = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if src in places and dst in transitions:
                pre[dst].append(src)
            elif src in transitions and dst in places:
                post[src].append(dst)
            else:
                raise ConfigurationError(f"{self.name} : arc non biparti {src} -> {dst}")
        for t in self.transitions:
            if not pre[t] or not post[t]:
                raise ConfigurationError(
                    f"{self.name} : la transition {t} doit avoir une entrée et une sortie"
                )
        if set(self.m0) != places:
            raise ConfigurationError(f"{self.name} : le marquage initial doit couvrir les places")
        if self.expected_final is not None and self.expected_final not in transitions:
            raise ConfigurationError(f"{self.name} : transition finale inconnue")
        if self.capacity < 1:
            raise ConfigurationError(f"{self.name} : capacité invalide {self.capacity}")
        object.__setattr__(self, "pre", {t: tuple(v) for t, v in pre.items()})
        object.__setattr__(self, "post", {t: tuple(v) for t, v in post.items()})

    @classmethod
    def build(
        cls,
        name: str,
        arcs: Sequence[Tuple[str, str, str]],
        marking: Mapping[str, int],
        expected_final: Optional[str] = None,
        capacity: int = 1,
    ) -> "PetriNet":
        """
        Construit un réseau depuis des triplets (place_source, transition, place_cible).

        L'ordre des places et transitions suit leur première apparition.
        """
        places: List[str] = []
        transitions: List[str] = []
        edges: List[Tuple[str, str]] = []
        for src, t, dst in arcs:
            for p in (src, dst):
                if p not in places:
                    places.append(p)
            if t not in transitions:
                transitions.append(t)
            edges.append((src, t))
            edges.append((t, dst))
        m0 = Marking({p: marking.get(p, 0) for p in places})
        return cls(name, tuple(places), tuple(transitions), tuple(edges), m0,
                   expected_final, capacity)


def _check_transition(net: PetriNet, t: str) -> None:
    if t not in net.pre:
        raise ConfigurationError(f"Transition inconnue dans {net.name} : {t}")


def is_enabled(net: PetriNet, m: Mapping[str, int], t: str) -> bool:
    """
    Une transition est franchissable si chacune de ses places d'entrée a un jeton.

    Raises:
        ConfigurationError: Si la transition est inconnue
    """
    _check_transition(net, t)
    return all(m[p] >= 1 for p in net.pre[t])


def fire(net: PetriNet, m: Mapping[str, int], t: str) -> Marking:
    """
    Tire une transition et retourne le nouveau marquage (le marquage d'entrée est inchangé).

    Raises:
        ContractViolationError: Si la transition n'est pas franchissable
    """
    if not is_enabled(net, m, t):
        raise ContractViolationError(f"{net.name} : transition {t} non franchissable")
    tokens = dict(m)
    for p in net.pre[t]:
        tokens[p] -= 1
    for p in net.post[t]:
        tokens[p] += 1
    return Marking(tokens)


def reachable_markings(net: PetriNet, limit: int = 100_000) -> Set[Marking]:
    """
    Énumère en largeur les marquages accessibles depuis m0.

    Raises:
        ConfigurationError: Si plus de `limit` marquages sont découverts (réseau non borné)
    """
    visited = {net.m0}
    queue = deque([net.m0])
    while queue:
        m = queue.popleft()
        for t in net.transitions:
            if not is_enabled(net, m, t):
                continue
            nxt = fire(net, m, t)
            if nxt not in visited:
                if len(visited) >= limit:
                    raise ConfigurationError(f"{net.name} : plus de {limit} marquages accessibles")
                visited.add(nxt)
                queue.append(nxt)
    return visited


def is_bounded(net: PetriNet, bound: Optional[int] = None) -> bool:
    """Vrai si aucun marquage accessible ne dépasse `bound` (par défaut la capacité)."""
    bound = net.capacity if bound is None else bound
    return all(max(m.values()) <= bound for m in reachable_markings(net))


@dataclass(frozen=True)
class EventSpec:
    """Liaison d'un changement de signal à une transition."""

    signal: SignalRef
    etype: int
    transition: str
    target: Optional[int] = None
    index: Optional[int] = None

    def __post_init__(self):
        if self.etype not in (1, 2, 3, 4):
            raise ConfigurationError(f"Type d'événement invalide : {self.etype}")
        if self.etype in (2, 4):
            if self.target is None:
                raise ConfigurationError(f"Événement type {self.etype} sans valeur cible")
            if not 0 <= self.target <= self.signal.mask():
                raise ConfigurationError(
                    f"Cible {self.target:#x} hors de la largeur de {self.signal.path}"
                )
        if self.etype in (3, 4) and (self.index is None or self.index < 1):
            raise ConfigurationError(f"Événement type {self.etype} sans indice positif")


@dataclass
class PnMonitorState:
    """État d'un moniteur de réseau de Petri."""

    marking: Marking
    last_fired: Optional[str] = None
    fault: bool = False
    fault_cycle: Optional[int] = None
    via_final: bool = False
    change_counters: List[int] = field(default_factory=list)
    prev_values: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def initial(cls, net: PetriNet, events: Sequence[EventSpec]) -> "PnMonitorState":
        return cls(marking=net.m0, change_counters=[0] * len(events))


def _raw(snap: Mapping, sig: SignalRef) -> int:
    raw = getattr(snap, "raw", None)
    if raw is not None:
        return raw(sig.path)
    try:
        return snap[sig].value
    except KeyError:
        raise ConfigurationError(f"Signal absent de l'instantané : {sig.path}") from None


def prime(state: PnMonitorState, events: Sequence[EventSpec], snap: Mapping) -> PnMonitorState:
    """Initialise les valeurs précédentes depuis l'état de reset, sans événement."""
    for ev in events:
        state.prev_values[ev.signal.path] = _raw(snap, ev.signal)
    return state


def observe_cycle(
    state: PnMonitorState,
    net: PetriNet,
    events: Sequence[EventSpec],
    snap: Mapping,
    cycle: int,
) -> PnMonitorState:
    """
    Traite les événements d'un cycle dans l'ordre de déclaration.

    Args:
        state: État du moniteur (mis à jour sur place)
        net: Réseau surveillé
        events: Liaisons événement -> transition
        snap: Valeurs post-front du cycle
        cycle: Numéro du cycle

    Returns:
        L'état mis à jour

    Raises:
        ConfigurationError: Si un signal d'événement manque dans l'instantané
    """
    current: Dict[str, int] = {}
    for i, ev in enumerate(events):
        path = ev.signal.path
        if path not in current:
            current[path] = _raw(snap, ev.signal)
        value = current[path]
        prev = state.prev_values.get(path, value)
        if value == prev:
            continue
        if ev.etype == 1:
            occurred = True
        elif ev.etype == 2:
            occurred = value == ev.target
        elif ev.etype == 3:
            state.change_counters[i] += 1
            occurred = state.change_counters[i] == ev.index
        else:
            if value != ev.target:
                continue
            state.change_counters[i] += 1
            occurred = state.change_counters[i] == ev.index
        if not occurred:
            continue
        if is_enabled(net, state.marking, ev.transition):
            state.marking = fire(net, state.marking, ev.transition)
            state.last_fired = ev.transition
        elif not state.fault:
            state.fault = True
            state.fault_cycle = cycle
    state.prev_values.update(current)
    return state


def finalize(state: PnMonitorState, net: PetriNet) -> bool:
    """
    Vérifie la transition finale attendue en fin de simulation.

    Returns:
        Le drapeau de faute final
    """
    if net.expected_final is not None and state.last_fired != net.expected_final:
        if not state.fault:
            state.fault = True
            state.via_final = True
    return state.fault


class PetriMonitor:
    """Moniteur de réseau de Petri utilisable comme hook de simulation."""

    kind = "petri"

    def __init__(self, net: PetriNet, events: Sequence[EventSpec]):
        if not events:
            raise ConfigurationError(f"{net.name} : réseau sans événement lié")
        for ev in events:
            _check_transition(net, ev.transition)
        self.net = net
        self.events = tuple(events)
        self.state = PnMonitorState.initial(net, self.events)

    @property
    def detector_id(self) -> str:
        return self.net.name

    def watched(self) -> List[SignalRef]:
        seen: Dict[str, SignalRef] = {}
        for ev in self.events:
            seen.setdefault(ev.signal.path, ev.signal)
        return list(seen.values())

    def on_reset(self, snap: Mapping) -> None:
        self.state = PnMonitorState.initial(self.net, self.events)
        prime(self.state, self.events, snap)

    def on_cycle(self, cycle: int, snap: Mapping) -> None:
        observe_cycle(self.state, self.net, self.events, snap, cycle)

    def finalize(self) -> bool:
        return finalize(self.state, self.net)

    def detection(self) -> Detection:
        return Detection(
            detected=self.state.fault,
            detect_cycle=self.state.fault_cycle,
            via_final=self.state.via_final,
        )


@dataclass(frozen=True)
class PetriBinding:
    """Réseau de Petri et ses liaisons d'événements."""

    net: PetriNet
    events: Tuple[EventSpec, ...]

    @property
    def name(self) -> str:
        return self.net.name

    def monitor(self) -> PetriMonitor:
        return PetriMonitor(self.net, self.events)
