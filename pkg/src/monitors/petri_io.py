"""
Lecture et écriture des fichiers de définition de réseaux de Petri (.pn).

Format texte, une instruction par ligne, `#` pour les commentaires :

    net <nom>
    capacity <n>
    places <id> ...
    transitions <id> ...
    arc <source> <cible>
    marking <place>=<n> ...
    final <transition>
    event <chemin> <largeur> <nature> <classe> <type> <cible-hex|-> <indice|-> <transition>
"""
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.models.signals import SignalClass, SignalKind, SignalRef
from src.monitors.petri import EventSpec, Marking, PetriBinding, PetriNet
from src.utils.errors import ConfigurationError


def parse_petri(text: str, source: str = "<texte>") -> PetriBinding:
    """
    Analyse une définition de réseau et de ses événements.

    Args:
        text: Contenu du fichier
        source: Nom de la source pour les messages d'erreur

    Returns:
        PetriBinding

    Raises:
        ConfigurationError: Si une ligne est mal formée (le message indique la ligne)
    """
    name: Optional[str] = None
    capacity = 1
    places: List[str] = []
    transitions: List[str] = []
    arcs: List[Tuple[str, str]] = []
    marking: Dict[str, int] = {}
    final: Optional[str] = None
    events: List[EventSpec] = []

    for i, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        try:
            if keyword == "net" and len(args) == 1:
                name = args[0]
            elif keyword == "capacity" and len(args) == 1:
                capacity = int(args[0])
            elif keyword == "places":
                places.extend(args)
            elif keyword == "transitions":
                transitions.extend(args)
            elif keyword == "arc" and len(args) == 2:
                arcs.append((args[0], args[1]))
            elif keyword == "marking":
                for item in args:
                    place, _, count = item.partition("=")
                    marking[place] = int(count)
            elif keyword == "final" and len(args) == 1:
                final = args[0]
            elif keyword == "event" and len(args) == 8:
                events.append(_parse_event(args))
            else:
                raise ConfigurationError(f"instruction inconnue ou incomplète : {keyword}")
        except (ValueError, ConfigurationError) as e:
            raise ConfigurationError(f"{source} Ligne {i}: {e}") from None

    if name is None:
        raise ConfigurationError(f"{source} : instruction `net` manquante")
    unknown = set(marking) - set(places)
    if unknown:
        raise ConfigurationError(f"{source} : marquage sur place inconnue {sorted(unknown)}")
    m0 = Marking({p: marking.get(p, 0) for p in places})
    net = PetriNet(name, tuple(places), tuple(transitions), tuple(arcs), m0, final, capacity)
    for ev in events:
        if ev.transition not in net.pre:
            raise ConfigurationError(f"{source} : événement lié à une transition inconnue")
    return PetriBinding(net, tuple(events))


def _parse_event(args: List[str]) -> EventSpec:
    path, width, kind, sclass, etype, target, index, transition = args
    signal = SignalRef(path, int(width), SignalKind(kind), SignalClass(sclass))
    return EventSpec(
        signal=signal,
        etype=int(etype),
        transition=transition,
        target=None if target == "-" else int(target, 16),
        index=None if index == "-" else int(index),
    )


def serialize_petri(binding: PetriBinding) -> str:
    """Sérialise un réseau et ses événements (forme canonique, relisible à l'identique)."""
    net = binding.net
    lines = [f"net {net.name}", f"capacity {net.capacity}"]
    lines.append("places " + " ".join(net.places))
    lines.append("transitions " + " ".join(net.transitions))
    for src, dst in net.arcs:
        lines.append(f"arc {src} {dst}")
    lines.append("marking " + " ".join(f"{p}={net.m0[p]}" for p in net.places))
    if net.expected_final is not None:
        lines.append(f"final {net.expected_final}")
    for ev in binding.events:
        s = ev.signal
        target = "-" if ev.target is None else format(ev.target, f"0{s.hex_digits()}x")
        index = "-" if ev.index is None else str(ev.index)
        lines.append(
            f"event {s.path} {s.width} {s.kind.value} {s.sclass.value} "
            f"{ev.etype} {target} {index} {ev.transition}"
        )
    return "\n".join(lines) + "\n"


def load_petri(path: Path) -> PetriBinding:
    """
    Charge un fichier .pn.

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    return parse_petri(path.read_text(encoding="utf-8"), source=str(path))


def save_petri(binding: PetriBinding, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_petri(binding), encoding="utf-8")
    return path
