"""
Détection par séquences d'états normales.

Une clé d'état concatène, à chaque cycle, des bits choisis parmi les signaux surveillés
(le premier bit du sélecteur est le bit de poids fort). L'apprentissage relève toutes
les paires (précédent, suivant) d'une trace de référence ; la détection signale la
première paire absente de la table, puis optionnellement un état final inattendu.
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.models.schemas import Detection
from src.models.signals import SignalClass, SignalKind, SignalRef
from src.utils.errors import ConfigurationError

SENTINEL = None

LEVEL_KINDS = {
    1: SignalKind.PRIMARY_OUTPUT,
    2: SignalKind.SUBMODULE_OUTPUT,
    3: SignalKind.REGISTER,
}

BitRange = Tuple[int, int]


@dataclass(frozen=True)
class BitSelector:
    """Liste ordonnée de (signal, bit) formant une clé d'état."""

    entries: Tuple[Tuple[SignalRef, int], ...]
    level: int
    bit_type: int
    name: str = ""

    def __post_init__(self):
        if self.level not in (1, 2, 3):
            raise ConfigurationError(f"Niveau hiérarchique invalide : {self.level}")
        if self.bit_type not in (1, 2, 3, 4):
            raise ConfigurationError(f"Type de sélection de bits invalide : {self.bit_type}")
        if not self.entries:
            raise ConfigurationError(f"Sélecteur {self.name or '?'} vide")
        for sig, bit in self.entries:
            if not 0 <= bit < sig.width:
                raise ConfigurationError(f"Bit {bit} hors de la largeur de {sig.path}")

    @property
    def width(self) -> int:
        return len(self.entries)

    def signals(self) -> List[SignalRef]:
        seen: Dict[str, SignalRef] = {}
        for sig, _ in self.entries:
            seen.setdefault(sig.path, sig)
        return list(seen.values())

    def spec(self) -> str:
        """Description textuelle du sélecteur (en-tête des fichiers de table)."""
        bits = " ".join(f"{sig.path}[{bit}]" for sig, bit in self.entries)
        return f"level={self.level} type={self.bit_type} bits={bits}"

    def key(self, values: Mapping[str, int]) -> int:
        """Clé d'état à partir des valeurs entières indexées par chemin."""
        k = 0
        for sig, bit in self.entries:
            k = (k << 1) | ((values[sig.path] >> bit) & 1)
        return k


def select_bits(
    signals: Iterable[SignalRef],
    level: int,
    bit_type: int,
    used_ranges: Optional[Mapping[SignalRef, BitRange]] = None,
    name: str = "",
) -> BitSelector:
    """
    Construit un sélecteur de bits pour un niveau hiérarchique et un type de sélection.

    Args:
        signals: Signaux du circuit (ou sous-ensemble choisi par un préréglage)
        level: 1 sorties primaires, 2 sorties de sous-modules, 3 registres de contrôle
        bit_type: 1 tous les bits, 2 MSB, 3 MSB de la plage utilisée, 4 LSB
        used_ranges: Plage (bas, haut) de bits utilisés, requise pour le type 3
        name: Nom du sélecteur

    Raises:
        ConfigurationError: Type 3 sans plages, ou aucun signal de contrôle au niveau demandé
    """
    if level not in LEVEL_KINDS:
        raise ConfigurationError(f"Niveau hiérarchique invalide : {level}")
    if bit_type == 3 and used_ranges is None:
        raise ConfigurationError("La sélection de type 3 requiert les plages de bits utilisées")
    kind = LEVEL_KINDS[level]
    chosen = [s for s in signals if s.kind == kind and s.sclass == SignalClass.CONTROL]
    if not chosen:
        raise ConfigurationError(f"Aucun signal de contrôle de niveau {level}")

    entries: List[Tuple[SignalRef, int]] = []
    for sig in chosen:
        if bit_type == 1:
            entries.extend((sig, b) for b in range(sig.width - 1, -1, -1))
        elif bit_type == 2:
            entries.append((sig, sig.width - 1))
        elif bit_type == 3:
            _, high = used_ranges.get(sig, (0, sig.width - 1))
            entries.append((sig, min(high, sig.width - 1)))
        elif bit_type == 4:
            entries.append((sig, 0))
        else:
            raise ConfigurationError(f"Type de sélection de bits invalide : {bit_type}")
    return BitSelector(tuple(entries), level, bit_type, name)


def used_ranges_from_trace(trace, signals: Iterable[SignalRef]) -> Dict[SignalRef, BitRange]:
    """
    Plage de bits effectivement utilisée par chaque signal sur une trace.

    Le bit haut est le plus haut bit jamais à 1 (0 pour un signal constamment nul),
    valeurs de reset comprises.
    """
    ranges: Dict[SignalRef, BitRange] = {}
    for sig in signals:
        idx = trace.watched.index(sig)
        seen = 0
        if trace.reset_values:
            seen |= trace.reset_values[idx]
        for row in trace.rows:
            seen |= row.values[idx]
        ranges[sig] = (0, max(seen.bit_length() - 1, 0))
    return ranges


@dataclass(frozen=True)
class SequenceTable:
    """Ensemble des paires d'états consécutifs observées et état final."""

    width: int
    pairs: FrozenSet[Tuple[Optional[int], int]]
    end_state: Optional[int] = None
    selector_spec: str = ""

    def __contains__(self, pair: Tuple[Optional[int], int]) -> bool:
        return pair in self.pairs

    def sorted_pairs(self) -> List[Tuple[Optional[int], int]]:
        """Paires triées, la paire sentinelle en premier."""
        return sorted(self.pairs, key=lambda p: (p[0] is not None, p[0] or 0, p[1]))

    def union(self, other: "SequenceTable") -> "SequenceTable":
        if other.width != self.width:
            raise ConfigurationError("Tables de largeurs différentes")
        return SequenceTable(self.width, self.pairs | other.pairs, self.end_state,
                             self.selector_spec)


def _key_stream(trace, sel: BitSelector) -> List[Tuple[int, int]]:
    positions = {}
    for sig in sel.signals():
        try:
            positions[sig.path] = trace.watched.index(sig)
        except ValueError:
            raise ConfigurationError(f"Signal {sig.path} absent de la trace") from None
    compiled = [(positions[sig.path], bit) for sig, bit in sel.entries]
    keys = []
    for row in trace.rows:
        k = 0
        for pos, bit in compiled:
            k = (k << 1) | ((row.values[pos] >> bit) & 1)
        keys.append((row.cycle, k))
    return keys


def acq_normal_seq(trace, sel: BitSelector) -> SequenceTable:
    """
    Apprend les séquences d'états normales d'une trace de référence.

    Raises:
        ConfigurationError: Si la trace est vide
    """
    if not trace.rows:
        raise ConfigurationError("Apprentissage impossible sur une trace vide")
    pairs = set()
    prev: Optional[int] = SENTINEL
    for _, key in _key_stream(trace, sel):
        pairs.add((prev, key))
        prev = key
    return SequenceTable(sel.width, frozenset(pairs), prev, sel.spec())


@dataclass(frozen=True)
class SequenceVerdict:
    """Résultat d'une détection hors ligne."""

    fault: bool
    fault_cycle: Optional[int] = None
    via_final: bool = False


def _check_width(sel: BitSelector, table: SequenceTable) -> None:
    if sel.width != table.width:
        raise ConfigurationError(
            f"Largeur du sélecteur ({sel.width}) différente de celle de la table ({table.width})"
        )


def detect(trace, sel: BitSelector, table: SequenceTable, check_end: bool = True) -> SequenceVerdict:
    """
    Rejoue une trace contre une table de séquences normales.

    Raises:
        ConfigurationError: Si les largeurs du sélecteur et de la table diffèrent
    """
    _check_width(sel, table)
    prev: Optional[int] = SENTINEL
    for cycle, key in _key_stream(trace, sel):
        if (prev, key) not in table.pairs:
            return SequenceVerdict(True, cycle, False)
        prev = key
    if check_end and table.end_state is not None and prev != table.end_state:
        return SequenceVerdict(True, None, True)
    return SequenceVerdict(False)


@dataclass
class SeqMonitorState:
    """État d'un moniteur de séquences en ligne."""

    prev: Optional[int] = SENTINEL
    fault: bool = False
    fault_cycle: Optional[int] = None
    via_final: bool = False
    last: Optional[int] = None


def observe_cycle(
    state: SeqMonitorState,
    sel: BitSelector,
    table: SequenceTable,
    snap: Mapping,
    cycle: int,
) -> SeqMonitorState:
    """Met à jour l'état en ligne avec la clé du cycle (mêmes règles que `detect`)."""
    raw = getattr(snap, "raw", None)
    if raw is not None:
        k = 0
        for sig, bit in sel.entries:
            k = (k << 1) | ((raw(sig.path) >> bit) & 1)
    else:
        k = sel.key({sig.path: snap[sig].value for sig in sel.signals()})
    if not state.fault and (state.prev, k) not in table.pairs:
        state.fault = True
        state.fault_cycle = cycle
    state.prev = k
    state.last = k
    return state


def finalize(state: SeqMonitorState, table: SequenceTable, check_end: bool) -> bool:
    """Contrôle de l'état final ; retourne le drapeau de faute."""
    if check_end and not state.fault and table.end_state is not None:
        if state.last != table.end_state:
            state.fault = True
            state.via_final = True
    return state.fault


@dataclass
class SequenceMonitor:
    """Moniteur de séquences utilisable comme hook de simulation."""

    name: str
    selector: BitSelector
    table: SequenceTable
    check_end: bool = True
    state: SeqMonitorState = field(default_factory=SeqMonitorState)

    kind = "sequence"

    def __post_init__(self):
        _check_width(self.selector, self.table)

    @property
    def detector_id(self) -> str:
        return self.name

    def watched(self) -> List[SignalRef]:
        return self.selector.signals()

    def on_reset(self, snap: Mapping) -> None:
        self.state = SeqMonitorState()

    def on_cycle(self, cycle: int, snap: Mapping) -> None:
        observe_cycle(self.state, self.selector, self.table, snap, cycle)

    def finalize(self) -> bool:
        return finalize(self.state, self.table, self.check_end)

    def detection(self) -> Detection:
        return Detection(
            detected=self.state.fault,
            detect_cycle=self.state.fault_cycle,
            via_final=self.state.via_final,
        )


def learn_all(trace, selectors: Sequence[BitSelector]) -> Dict[str, SequenceTable]:
    """Apprend une table par sélecteur, indexée par nom."""
    return {sel.name: acq_normal_seq(trace, sel) for sel in selectors}
