"""
Regroupement des détecteurs d'un circuit : réseaux de Petri liés et préréglages de
sélecteurs d'états.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src.models.signals import SignalRef
from src.monitors.petri import PetriBinding, PetriMonitor
from src.monitors.sequence import (
    BitSelector,
    SequenceMonitor,
    SequenceTable,
    select_bits,
    used_ranges_from_trace,
)
from src.sim.design import Design
from src.utils.errors import ConfigurationError


@dataclass(frozen=True)
class SelectorPreset:
    """Préréglage (niveau hiérarchique, type de sélection de bits)."""

    level: int
    bit_type: int
    paths: Optional[Tuple[str, ...]] = None

    @property
    def name(self) -> str:
        return f"seq_L{self.level}_T{self.bit_type}"

    def candidates(self, design: Design) -> List[SignalRef]:
        if self.paths is None:
            return design.signals()
        return [design.signal(p) for p in self.paths]

    def needs_ranges(self) -> bool:
        return self.bit_type == 3


@dataclass
class MonitorBundle:
    """Détecteurs livrés avec un circuit."""

    design_id: str
    nets: List[PetriBinding] = field(default_factory=list)
    presets: List[SelectorPreset] = field(default_factory=list)
    check_end: bool = True

    def validate(self, design: Design) -> None:
        """
        Vérifie que chaque événement désigne un signal existant et compatible.

        Raises:
            ConfigurationError: Signal inconnu ou de largeur/nature différente
        """
        names = set()
        for binding in self.nets:
            if binding.name in names:
                raise ConfigurationError(f"Réseau dupliqué : {binding.name}")
            names.add(binding.name)
            for ev in binding.events:
                known = design.signal(ev.signal.path)
                if known != ev.signal:
                    raise ConfigurationError(
                        f"{binding.name} : signal {ev.signal.path} incompatible avec le circuit"
                    )

    def preset(self, name: str) -> SelectorPreset:
        for p in self.presets:
            if p.name == name:
                return p
        raise ConfigurationError(f"Préréglage de sélecteur inconnu : {name}")

    def selector_candidates(self, design: Design, names: Optional[Sequence[str]] = None
                            ) -> List[SignalRef]:
        seen: Dict[str, SignalRef] = {}
        for preset in self._chosen(names):
            for sig in preset.candidates(design):
                seen.setdefault(sig.path, sig)
        return list(seen.values())

    def watched_signals(self, design: Design, names: Optional[Sequence[str]] = None
                        ) -> List[SignalRef]:
        """Signaux à enregistrer pour rejouer tous les détecteurs."""
        seen: Dict[str, SignalRef] = {}
        for binding in self.nets:
            for ev in binding.events:
                seen.setdefault(ev.signal.path, ev.signal)
        for sig in self.selector_candidates(design, names):
            seen.setdefault(sig.path, sig)
        return list(seen.values())

    def selectors(self, design: Design, golden_trace=None,
                  names: Optional[Sequence[str]] = None) -> List[BitSelector]:
        """
        Construit les sélecteurs des préréglages demandés.

        Les plages de bits du type 3 sont dérivées de la trace de référence.

        Raises:
            ConfigurationError: Type 3 demandé sans trace de référence
        """
        result = []
        for preset in self._chosen(names):
            candidates = preset.candidates(design)
            ranges = None
            if preset.needs_ranges():
                if golden_trace is None:
                    raise ConfigurationError(f"{preset.name} : trace de référence requise")
                eligible = [s for s in candidates if s in golden_trace.watched]
                ranges = used_ranges_from_trace(golden_trace, eligible)
            result.append(select_bits(candidates, preset.level, preset.bit_type, ranges,
                                      name=preset.name))
        return result

    def petri_monitors(self, nets: Optional[Sequence[PetriBinding]] = None) -> List[PetriMonitor]:
        return [b.monitor() for b in (self.nets if nets is None else nets)]

    def sequence_monitors(self, selectors: Sequence[BitSelector],
                          tables: Mapping[str, SequenceTable]) -> List[SequenceMonitor]:
        monitors = []
        for sel in selectors:
            if sel.name not in tables:
                raise ConfigurationError(f"Table absente pour {sel.name}")
            monitors.append(SequenceMonitor(sel.name, sel, tables[sel.name], self.check_end))
        return monitors

    def _chosen(self, names: Optional[Sequence[str]]) -> List[SelectorPreset]:
        if names is None:
            return list(self.presets)
        return [self.preset(n) for n in names]
