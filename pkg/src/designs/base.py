"""
Aides communes aux circuits de référence : déclaration de signaux et construction
des réseaux de Petri liés à des événements.
"""
from typing import Dict, List, Optional, Tuple

from src.models.signals import SignalClass, SignalKind, SignalRef
from src.monitors.petri import EventSpec, PetriBinding, PetriNet
from src.sim.design import Design
from src.utils.errors import ConfigurationError

CONTROL = SignalClass.CONTROL
DATA = SignalClass.DATA


def inp(path: str, width: int, sclass: SignalClass = CONTROL) -> SignalRef:
    return SignalRef(path, width, SignalKind.PRIMARY_INPUT, sclass)


def out(path: str, width: int, sclass: SignalClass = CONTROL) -> SignalRef:
    return SignalRef(path, width, SignalKind.PRIMARY_OUTPUT, sclass)


def sub(path: str, width: int, sclass: SignalClass = CONTROL) -> SignalRef:
    return SignalRef(path, width, SignalKind.SUBMODULE_OUTPUT, sclass)


def reg(path: str, width: int, sclass: SignalClass = CONTROL) -> SignalRef:
    return SignalRef(path, width, SignalKind.REGISTER, sclass)


class NetBuilder:
    """
    Construit un réseau de Petri transition par transition.

    Chaque appel à `on` crée une transition `T<n>` reliant une place source à une
    place cible et la lie à un événement sur un signal du circuit. L'ordre des appels
    est l'ordre de déclaration des événements.
    """

    def __init__(self, name: str, design: Design):
        self.name = name
        self.design = design
        self._arcs: List[Tuple[str, str, str]] = []
        self._events: List[EventSpec] = []
        self._final: Optional[str] = None

    def on(
        self,
        src: str,
        dst: str,
        path: str,
        etype: int,
        target: Optional[int] = None,
        index: Optional[int] = None,
        final: bool = False,
    ) -> str:
        """
        Ajoute une transition src -> dst déclenchée par un événement.

        Args:
            src: Place d'entrée
            dst: Place de sortie
            path: Chemin du signal observé
            etype: Type d'événement (1 à 4)
            target: Valeur cible (types 2 et 4)
            index: Rang du changement (types 3 et 4)
            final: Marque la transition comme transition finale attendue

        Returns:
            Identifiant de la transition créée
        """
        t = f"T{len(self._arcs) + 1}"
        self._arcs.append((src, t, dst))
        self._events.append(EventSpec(self.design.signal(path), etype, t, target, index))
        if final:
            if self._final is not None:
                raise ConfigurationError(f"{self.name} : deux transitions finales")
            self._final = t
        return t

    def build(self, marking: Dict[str, int], capacity: int = 1) -> PetriBinding:
        net = PetriNet.build(self.name, self._arcs, marking, self._final, capacity)
        return PetriBinding(net, tuple(self._events))
