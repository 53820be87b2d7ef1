"""
Maillage de routeurs wormhole à deux canaux virtuels (routage XY, multicast par fourche).

Le routeur observé (par défaut le routeur 2) est le circuit sous test : ses registres,
ses sorties de sous-modules et ses ports sont exposés comme signaux. Les autres routeurs,
les sources de trafic et les puits d'éjection forment le scénario simulé autour de lui.

Un flit tient sur 18 bits : type sur 2 bits (1 tête, 2 corps, 3 queue) et 16 bits de
données. Les données d'une tête sont le masque des routeurs destinataires, réécrit
pour chaque branche de la fourche.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.designs.base import DATA, NetBuilder, inp, out, reg, sub
from src.models.signals import SignalRef
from src.monitors.bundle import MonitorBundle, SelectorPreset
from src.sim.design import Design, StimulusProgram
from src.utils.errors import ConfigurationError

PORTS = ("inj", "west", "south", "east", "north")
INJ, WEST, SOUTH, EAST, NORTH = range(5)
OPPOSITE = {WEST: EAST, EAST: WEST, SOUTH: NORTH, NORTH: SOUTH}
NONE = 7
FIFO_DEPTH = 4
VCS = 2
HEAD, BODY, TAIL = 1, 2, 3
DATA_BITS = 16
DATA_MASK = (1 << DATA_BITS) - 1

IN_REGS = (("wptr0", 2), ("wptr1", 2), ("rptr0", 2), ("rptr1", 2), ("cnt0", 3), ("cnt1", 3),
           ("state", 1), ("route", 5), ("mc", 1), ("vc_sel", 1))
OUT_REGS = (("owner", 3), ("locked", 1), ("credit0", 3), ("credit1", 3), ("flit_cnt", 4),
            ("last_port", 3), ("vch", 1))
LINK_INPUTS = ("in_valid", "in_vch", "in_data", "in_ack", "in_lck", "in_rdy")

Link = Tuple[int, int, int, int, int, int]
IDLE_LINK: Link = (0, 0, 0, 0, 0, 0)


def _keys(prefix: str, names: Sequence[str]) -> Dict[str, str]:
    return {n: f"{prefix}/{n}" for n in names}


IN_KEYS = [_keys(f"in_{p}", [n for n, _ in IN_REGS] + ["rd_en", "wr"]) for p in PORTS]
OUT_KEYS = [_keys(f"out_{p}", [n for n, _ in OUT_REGS] + ["sent", "tail_sent"]) for p in PORTS]
IO_KEYS = [
    _keys(p, list(LINK_INPUTS) + ["out_valid", "out_vch", "out_data", "out_ack", "out_lck",
                                  "out_rdy"])
    for p in PORTS
]


def make_flit(ftype: int, data: int) -> int:
    return (ftype << DATA_BITS) | (data & DATA_MASK)


def router_signals() -> List[SignalRef]:
    """Signaux exposés d'un routeur, port par port."""
    signals: List[SignalRef] = []
    for p in PORTS:
        signals += [
            inp(f"{p}/in_valid", 1), inp(f"{p}/in_vch", 1), inp(f"{p}/in_data", 18, DATA),
            inp(f"{p}/in_ack", 2), inp(f"{p}/in_lck", 1), inp(f"{p}/in_rdy", 2),
            out(f"{p}/out_valid", 1), out(f"{p}/out_vch", 1), out(f"{p}/out_data", 18, DATA),
            out(f"{p}/out_ack", 2), out(f"{p}/out_lck", 1), out(f"{p}/out_rdy", 2),
            sub(f"in_{p}/rd_en", 1), sub(f"in_{p}/wr", 2),
            sub(f"out_{p}/sent", 2), sub(f"out_{p}/tail_sent", 1),
        ]
        signals += [reg(f"in_{p}/{name}", width) for name, width in IN_REGS]
        signals += [reg(f"out_{p}/{name}", width) for name, width in OUT_REGS]
    return signals


ALL_PATHS = tuple(s.path for s in router_signals())


@dataclass(frozen=True)
class NocScenario:
    """Trafic du scénario : un multicast depuis le routeur observé et des unicasts voisins."""

    mesh: int = 4
    monitored: int = 2
    multicast_source: int = 2
    multicast_destinations: Tuple[int, ...] = (6, 10, 14, 7, 11, 15)
    multicast_packets: int = 8
    unicasts: Tuple[Tuple[int, int], ...] = ((6, 7), (10, 11), (14, 15))
    unicast_packets: int = 2
    unicast_interval: int = 64
    flits_per_packet: int = 9
    seed: int = 2024

    def __post_init__(self):
        n = self.mesh * self.mesh
        if not 2 <= self.mesh or n > DATA_BITS:
            raise ConfigurationError(f"Taille de maillage invalide : {self.mesh}")
        ids = [self.monitored, self.multicast_source, *self.multicast_destinations]
        ids += [r for pair in self.unicasts for r in pair]
        if any(not 0 <= r < n for r in ids):
            raise ConfigurationError(f"Identifiant de routeur hors du maillage {self.mesh}x{self.mesh}")
        if self.multicast_source in self.multicast_destinations:
            raise ConfigurationError("La source multicast ne peut pas être destinataire")
        if any(s == d for s, d in self.unicasts):
            raise ConfigurationError("Un unicast doit avoir une destination distincte")
        if self.flits_per_packet < 2:
            raise ConfigurationError("Un paquet compte au moins une tête et une queue")
        if self.multicast_packets < 0 or self.unicast_packets < 0 or self.unicast_interval < 1:
            raise ConfigurationError("Nombre de paquets ou intervalle invalide")

    @property
    def routers(self) -> int:
        return self.mesh * self.mesh


@dataclass(frozen=True)
class Packet:
    source: int
    mask: int
    release: int
    payload: Tuple[int, ...]

    def flits(self) -> List[int]:
        body = [make_flit(BODY, w) for w in self.payload[:-1]]
        return [make_flit(HEAD, self.mask), *body, make_flit(TAIL, self.payload[-1])]

    def destinations(self) -> List[int]:
        return [d for d in range(DATA_BITS) if self.mask >> d & 1]


def scenario_packets(scenario: NocScenario) -> List[Packet]:
    """Paquets du scénario ; charges utiles tirées d'un générateur Philox graine fixe."""
    rng = np.random.Generator(np.random.Philox(scenario.seed))
    words = scenario.flits_per_packet - 1
    packets = []
    mask = 0
    for d in scenario.multicast_destinations:
        mask |= 1 << d
    for _ in range(scenario.multicast_packets):
        payload = tuple(int(w) for w in rng.integers(0, 1 << DATA_BITS, size=words))
        packets.append(Packet(scenario.multicast_source, mask, 1, payload))
    for j in range(scenario.unicast_packets):
        release = (j + 1) * scenario.unicast_interval
        for src, dst in scenario.unicasts:
            payload = tuple(int(w) for w in rng.integers(0, 1 << DATA_BITS, size=words))
            packets.append(Packet(src, 1 << dst, release, payload))
    return packets


def noc_oracle(scenario: NocScenario) -> Dict[int, List[Tuple[int, ...]]]:
    """Livraisons attendues : pour chaque destinataire, la liste triée des charges utiles."""
    delivered: Dict[int, List[Tuple[int, ...]]] = {}
    for packet in scenario_packets(scenario):
        for d in packet.destinations():
            delivered.setdefault(d, []).append(packet.payload)
    return {d: sorted(p) for d, p in sorted(delivered.items())}


class _Source:
    """Source de trafic locale : alterne les canaux virtuels flit par flit, sous crédits."""

    def __init__(self, packets: Sequence[Packet]):
        self.packets = sorted(packets, key=lambda p: p.release)
        self.reset()

    def reset(self) -> None:
        self._pending: Deque[Packet] = deque(self.packets)
        self._queue: Deque[int] = deque()
        self._credit = [FIFO_DEPTH] * VCS
        self._vc = 0

    @property
    def exhausted(self) -> bool:
        return not self._pending and not self._queue

    def drive(self, cycle: int, ack: int) -> Tuple[int, int, int]:
        for v in range(VCS):
            if ack >> v & 1:
                self._credit[v] += 1
        while self._pending and self._pending[0].release <= cycle:
            self._queue.extend(self._pending.popleft().flits())
        if not self._queue or self._credit[self._vc] == 0:
            return 0, 0, 0
        vc = self._vc
        self._credit[vc] -= 1
        self._vc ^= 1
        return 1, vc, self._queue.popleft()


@dataclass
class _Sink:
    """Puits d'éjection : réassemble les paquets reçus."""

    packets: List[Tuple[int, ...]] = field(default_factory=list)
    _current: Optional[List[int]] = None

    def reset(self) -> None:
        self.packets = []
        self._current = None

    def accept(self, flit: int) -> None:
        ftype, data = flit >> DATA_BITS, flit & DATA_MASK
        if ftype == HEAD:
            self._current = []
        elif ftype in (BODY, TAIL) and self._current is not None:
            self._current.append(data)
            if ftype == TAIL:
                self.packets.append(tuple(self._current))
                self._current = None


def _coords(rid: int, mesh: int) -> Tuple[int, int]:
    return rid // mesh, rid % mesh


def xy_port(rid: int, dest: int, mesh: int) -> int:
    """Port de sortie XY (d'abord en x, puis en y ; éjection si arrivé)."""
    x, y = _coords(rid, mesh)
    dx, dy = _coords(dest, mesh)
    if dx > x:
        return EAST
    if dx < x:
        return WEST
    if dy > y:
        return SOUTH
    if dy < y:
        return NORTH
    return INJ


def neighbor(rid: int, port: int, mesh: int) -> Optional[int]:
    x, y = _coords(rid, mesh)
    step = {WEST: (-1, 0), EAST: (1, 0), SOUTH: (0, 1), NORTH: (0, -1)}.get(port)
    if step is None:
        return None
    nx, ny = x + step[0], y + step[1]
    if not (0 <= nx < mesh and 0 <= ny < mesh):
        return None
    return nx * mesh + ny


class RouterNode:
    """
    Un routeur : cinq unités d'entrée (FIFO par canal virtuel) et cinq unités de sortie.

    L'allocation se fait sur l'état de début de cycle : les demandes multicast passent
    d'abord, puis les unicast, chacune par ordre de priorité des ports. Un flit multicast
    n'avance que lorsque toutes ses sorties sont libres et créditées (réplication
    synchrone) ; une tête attend en plus que l'entrée aval ne soit plus verrouillée.
    """

    def __init__(self, rid: int, mesh: int):
        self.rid = rid
        self.mesh = mesh
        self.r: Dict[str, int] = {}
        self.fifo = [[[0] * FIFO_DEPTH for _ in range(VCS)] for _ in PORTS]
        self.quiet = True

    def reset(self, regs: Optional[Dict[str, int]] = None) -> None:
        self.r = regs if regs is not None else {path: 0 for path in ALL_PATHS}
        for o in range(len(PORTS)):
            ok = OUT_KEYS[o]
            self.r[ok["owner"]] = NONE
            self.r[ok["credit0"]] = FIFO_DEPTH
            self.r[ok["credit1"]] = FIFO_DEPTH
            self.r[ok["vch"]] = 1
        self.fifo = [[[0] * FIFO_DEPTH for _ in range(VCS)] for _ in PORTS]
        self.combinational()
        self.quiet = True

    def busy(self) -> bool:
        r = self.r
        for p in range(len(PORTS)):
            ik = IN_KEYS[p]
            if r[ik["cnt0"]] or r[ik["cnt1"]] or r[ik["state"]] or r[IO_KEYS[p]["out_valid"]]:
                return True
        return False

    def step(self, links: Sequence[Link]) -> None:
        r = self.r
        for p, link in enumerate(links):
            io = IO_KEYS[p]
            for name, value in zip(LINK_INPUTS, link):
                r[io[name]] = value
        cur = dict(r)
        for p in range(len(PORTS)):
            r[IN_KEYS[p]["rd_en"]] = r[IN_KEYS[p]["wr"]] = 0
            r[OUT_KEYS[p]["sent"]] = r[OUT_KEYS[p]["tail_sent"]] = 0
            r[IO_KEYS[p]["out_ack"]] = r[IO_KEYS[p]["out_valid"]] = 0
        self._credit_return(cur, links)
        self._allocate(cur, links)
        self._route(cur)
        self._write(cur, links)
        self.combinational()
        self.quiet = not self.busy() and not any(
            r[IN_KEYS[p]["wr"]] or r[IO_KEYS[p]["out_ack"]] for p in range(len(PORTS))
        )

    def combinational(self) -> None:
        r = self.r
        for p in range(len(PORTS)):
            ik, io = IN_KEYS[p], IO_KEYS[p]
            r[io["out_lck"]] = r[ik["state"]]
            r[io["out_rdy"]] = int(r[ik["cnt0"]] < FIFO_DEPTH) | int(r[ik["cnt1"]] < FIFO_DEPTH) << 1

    def _credit_return(self, cur: Dict[str, int], links: Sequence[Link]) -> None:
        for o, link in enumerate(links):
            ack = link[3]
            for v in range(VCS):
                if ack >> v & 1:
                    key = OUT_KEYS[o][f"credit{v}"]
                    self.r[key] = (cur[key] + 1) & 0x7

    def _head_flit(self, cur: Dict[str, int], p: int) -> Tuple[int, int]:
        ik = IN_KEYS[p]
        v = cur[ik["vc_sel"]]
        if cur[ik[f"cnt{v}"]] == 0:
            return v, -1
        return v, self.fifo[p][v][cur[ik[f"rptr{v}"]] % FIFO_DEPTH]

    def _allocate(self, cur: Dict[str, int], links: Sequence[Link]) -> None:
        requests = []
        for p in range(len(PORTS)):
            if cur[IN_KEYS[p]["state"]] != 1:
                continue
            v, flit = self._head_flit(cur, p)
            if flit >= 0:
                requests.append((0 if cur[IN_KEYS[p]["mc"]] else 1, p, v, flit))
        requests.sort()
        claimed = set()
        for _, p, v, flit in requests:
            route = cur[IN_KEYS[p]["route"]]
            outs = [o for o in range(len(PORTS)) if route >> o & 1]
            if not outs or claimed.intersection(outs):
                continue
            head = flit >> DATA_BITS == HEAD
            if not all(self._can_send(cur, links, o, p, head) for o in outs):
                continue
            claimed.update(outs)
            self._pop(cur, p, v)
            self.r[IN_KEYS[p]["rd_en"]] = 1
            for o in outs:
                self._send(cur, o, p, flit, head)
            if flit >> DATA_BITS == TAIL:
                ik = IN_KEYS[p]
                self.r[ik["state"]] = self.r[ik["route"]] = self.r[ik["mc"]] = 0

    def _can_send(self, cur: Dict[str, int], links: Sequence[Link], o: int, p: int,
                  head: bool) -> bool:
        ok = OUT_KEYS[o]
        if cur[ok["owner"]] not in (NONE, p):
            return False
        v = cur[ok["vch"]] ^ 1
        if cur[ok[f"credit{v}"]] == 0 or not links[o][5] >> v & 1:
            return False
        return not (head and links[o][4])

    def _pop(self, cur: Dict[str, int], p: int, v: int) -> None:
        ik, r = IN_KEYS[p], self.r
        r[ik[f"rptr{v}"]] = (cur[ik[f"rptr{v}"]] + 1) & 0x3
        r[ik[f"cnt{v}"]] = (r[ik[f"cnt{v}"]] - 1) & 0x7
        r[ik["vc_sel"]] = v ^ 1
        r[IO_KEYS[p]["out_ack"]] = 1 << v

    def _branch_mask(self, mask: int, o: int) -> int:
        branch = 0
        for d in range(self.mesh * self.mesh):
            if mask >> d & 1 and xy_port(self.rid, d, self.mesh) == o:
                branch |= 1 << d
        return branch

    def _send(self, cur: Dict[str, int], o: int, p: int, flit: int, head: bool) -> None:
        ok, io, r = OUT_KEYS[o], IO_KEYS[o], self.r
        v = cur[ok["vch"]] ^ 1
        if head:
            flit = make_flit(HEAD, self._branch_mask(flit & DATA_MASK, o))
        r[io["out_valid"]], r[io["out_vch"]], r[io["out_data"]] = 1, v, flit
        r[ok["vch"]] = v
        r[ok["sent"]] = 1 << v
        r[ok[f"credit{v}"]] = (r[ok[f"credit{v}"]] - 1) & 0x7
        r[ok["flit_cnt"]] = (cur[ok["flit_cnt"]] + 1) & 0xF
        r[ok["last_port"]] = p
        r[ok["owner"]] = p
        if head:
            r[ok["locked"]] = 1
        if flit >> DATA_BITS == TAIL:
            r[ok["tail_sent"]] = 1
            r[ok["owner"]] = NONE
            r[ok["locked"]] = 0
            r[ok["flit_cnt"]] = 0

    def _route(self, cur: Dict[str, int]) -> None:
        r = self.r
        for p in range(len(PORTS)):
            ik = IN_KEYS[p]
            if cur[ik["state"]] != 0:
                continue
            v, flit = self._head_flit(cur, p)
            if flit < 0:
                continue
            if flit >> DATA_BITS != HEAD:
                # flit orphelin : jeté
                self._pop(cur, p, v)
                continue
            mask = flit & DATA_MASK
            route = 0
            for d in range(self.mesh * self.mesh):
                if mask >> d & 1:
                    route |= 1 << xy_port(self.rid, d, self.mesh)
            r[ik["route"]] = route
            r[ik["mc"]] = int(bin(mask).count("1") > 1)
            r[ik["state"]] = 1

    def _write(self, cur: Dict[str, int], links: Sequence[Link]) -> None:
        r = self.r
        for p, link in enumerate(links):
            valid, vch, data = link[0], link[1], link[2]
            if not valid:
                continue
            ik = IN_KEYS[p]
            if cur[ik[f"cnt{vch}"]] >= FIFO_DEPTH:
                continue
            self.fifo[p][vch][cur[ik[f"wptr{vch}"]] % FIFO_DEPTH] = data
            r[ik[f"wptr{vch}"]] = (cur[ik[f"wptr{vch}"]] + 1) & 0x3
            r[ik[f"cnt{vch}"]] = (r[ik[f"cnt{vch}"]] + 1) & 0x7
            r[ik["wr"]] = 1 << vch


@dataclass
class NocStimulus(StimulusProgram):
    """
    Banc de test du maillage.

    Les sources de trafic sont internes au scénario : le banc ne pilote aucune entrée
    du routeur observé et sert de porteur du scénario pour l'oracle.
    """

    scenario: NocScenario = field(default_factory=NocScenario)
    driven: int = field(default=0, init=False)

    def reset(self) -> None:
        # sources et puits sont remis à zéro avec le maillage
        self.driven = 0

    def drive(self, cycle: int, design: Design) -> dict:
        self.driven = cycle
        return {}


class NocDesign(Design):
    """Maillage complet vu depuis le routeur observé."""

    design_id = "router"

    def __init__(self, scenario: Optional[NocScenario] = None):
        super().__init__(router_signals())
        self.scenario = scenario or NocScenario()
        mesh = self.scenario.mesh
        self._nodes = [RouterNode(rid, mesh) for rid in range(self.scenario.routers)]
        by_source: Dict[int, List[Packet]] = {}
        for packet in scenario_packets(self.scenario):
            by_source.setdefault(packet.source, []).append(packet)
        self._sources = {rid: _Source(packets) for rid, packets in by_source.items()}
        self._sinks = [_Sink() for _ in self._nodes]
        self._neighbors = [
            [neighbor(rid, p, mesh) for p in range(len(PORTS))] for rid in range(len(self._nodes))
        ]
        self._cycle = 0

    @property
    def monitored(self) -> RouterNode:
        return self._nodes[self.scenario.monitored]

    def _reset_state(self) -> None:
        for rid, node in enumerate(self._nodes):
            node.reset(self._v if rid == self.scenario.monitored else None)
        for source in self._sources.values():
            source.reset()
        for sink in self._sinks:
            sink.reset()
        self._cycle = 0

    def _after_flip(self, ref) -> None:
        self.monitored.combinational()
        self.monitored.quiet = False

    def _links(self, rid: int) -> List[Link]:
        node = self._nodes[rid]
        inj = IO_KEYS[INJ]
        source = self._sources.get(rid)
        valid, vch, data = source.drive(self._cycle, node.r[inj["out_ack"]]) if source else (0, 0, 0)
        ack = (1 << node.r[inj["out_vch"]]) if node.r[inj["out_valid"]] else 0
        links: List[Link] = [(valid, vch, data, ack, 0, (1 << VCS) - 1)]
        for p in range(1, len(PORTS)):
            nb = self._neighbors[rid][p]
            if nb is None:
                links.append(IDLE_LINK)
                continue
            k, nr = IO_KEYS[OPPOSITE[p]], self._nodes[nb].r
            links.append((nr[k["out_valid"]], nr[k["out_vch"]], nr[k["out_data"]],
                          nr[k["out_ack"]], nr[k["out_lck"]], nr[k["out_rdy"]]))
        return links

    def _forced_links(self, links: List[Link]) -> List[Link]:
        if not self._forced:
            return links
        resolved = []
        for p, link in enumerate(links):
            io = IO_KEYS[p]
            resolved.append(tuple(
                self._forced.get(io[name], value) for name, value in zip(LINK_INPUTS, link)
            ))
        return resolved

    def _step(self, inputs: dict) -> None:
        self._cycle += 1
        links = [self._links(rid) for rid in range(len(self._nodes))]
        for rid, node in enumerate(self._nodes):
            if node.r[IO_KEYS[INJ]["out_valid"]]:
                self._sinks[rid].accept(node.r[IO_KEYS[INJ]["out_data"]])
        monitored = self.scenario.monitored
        links[monitored] = self._forced_links(links[monitored])
        for rid, node in enumerate(self._nodes):
            if rid != monitored and node.quiet and not any(l[0] or l[3] for l in links[rid]):
                continue
            node.step(links[rid])

    def done(self) -> bool:
        if self._cycle == 0 or not all(s.exhausted for s in self._sources.values()):
            return False
        return not any(node.busy() for node in self._nodes)

    def outputs(self) -> Dict[int, List[Tuple[int, ...]]]:
        return {rid: sorted(s.packets) for rid, s in enumerate(self._sinks) if s.packets}

    def output_count(self, record: Dict[int, List[Tuple[int, ...]]]) -> int:
        return sum(len(packets) for packets in record.values())

    def format_outputs(self, record: Dict[int, List[Tuple[int, ...]]]) -> List[str]:
        return [
            f"r{rid}:" + ":".join(f"{w:04x}" for w in payload)
            for rid, packets in sorted(record.items())
            for payload in packets
        ]

    def oracle_output(self, stimulus: NocStimulus) -> Dict[int, List[Tuple[int, ...]]]:
        return noc_oracle(stimulus.scenario)

    def case2_groups(self) -> List[List[SignalRef]]:
        """Entrées sud puis est du routeur observé ; alternées d'une injection à l'autre."""
        names = ("in_valid", "in_vch", "in_ack", "in_lck")
        return [[self.signal(f"{p}/{n}") for n in names] for p in ("south", "east")]


def _router_nets(d: NocDesign) -> list:
    I, E = "in_inj", "out_east"
    nets = []

    n = NetBuilder("R_1", d)  # paquet local routé puis port est verrouillé
    n.on("A", "B", f"{I}/state", 2, target=1)
    n.on("B", "C", f"{E}/locked", 2, target=1)
    n.on("C", "A", f"{I}/state", 2, target=0)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_2", d)
    n.on("A", "B", f"{E}/locked", 2, target=1)
    n.on("B", "C", f"{E}/tail_sent", 2, target=1)
    n.on("C", "A", f"{E}/locked", 2, target=0)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_3", d)  # octroi du port est : canaux virtuels alternés à chaque flit
    n.on("A", "B", f"{E}/vch", 2, target=0)
    n.on("B", "C", f"{E}/sent", 2, target=1)
    n.on("C", "D", f"{E}/vch", 2, target=1)
    n.on("D", "A", f"{E}/sent", 2, target=2)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_4", d)  # tout dépilement de la FIFO locale passe par l'allocation
    n.on("A", "B", f"{I}/rd_en", 2, target=1)
    n.on("B", "C", f"{I}/rd_en", 2, target=0)
    n.on("C", "A", "inj/out_ack", 2, target=0)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_5", d)  # écritures alternées sur les deux canaux
    n.on("A", "B", f"{I}/wptr0", 1)
    n.on("B", "A", f"{I}/wptr1", 1)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_6", d)
    n.on("A", "B", f"{E}/owner", 1)
    n.on("B", "A", f"{E}/locked", 1)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_7", d)
    n.on("A", "B", f"{I}/state", 1)
    n.on("B", "A", f"{I}/route", 1)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_8", d)
    n.on("A", "B", f"{E}/tail_sent", 2, target=1)
    n.on("B", "A", f"{I}/state", 2, target=0)
    nets.append(n.build({"A": 1}))

    for v in range(VCS):
        n = NetBuilder(f"R_9_{v}", d)  # crédits du port est, canal v
        n.on("Cred", "Out", f"{E}/sent", 2, target=1 << v)
        n.on("Out", "Cred", "east/in_ack", 2, target=1 << v)
        nets.append(n.build({"Cred": FIFO_DEPTH}, capacity=FIFO_DEPTH))

    for v in range(VCS):
        n = NetBuilder(f"R_10_{v}", d)  # occupation de la FIFO locale, canal v
        n.on("Free", "Held", f"{I}/wr", 2, target=1 << v)
        n.on("Held", "Free", "inj/out_ack", 2, target=1 << v)
        nets.append(n.build({"Free": FIFO_DEPTH}, capacity=FIFO_DEPTH))

    n = NetBuilder("R_11", d)
    n.on("A", "B", "inj/out_ack", 1)
    n.on("B", "A", f"{E}/sent", 1)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("R_12", d)
    n.on("A", "B", f"{I}/vc_sel", 1)
    n.on("B", "A", f"{E}/vch", 1)
    nets.append(n.build({"A": 1}))
    return nets


# niveau 1 : sorties est et rétro-signaux du port local (7 bits)
LEVEL1_PATHS = ("east/out_valid", "east/out_vch", "inj/out_ack", "inj/out_lck", "inj/out_rdy")

ROUTER_PRESETS = [
    SelectorPreset(1, 1, LEVEL1_PATHS),
    SelectorPreset(2, 1),
    SelectorPreset(3, 1), SelectorPreset(3, 2), SelectorPreset(3, 3), SelectorPreset(3, 4),
]


def build_router_scenario(
    scenario: Optional[NocScenario] = None,
) -> Tuple[NocDesign, MonitorBundle]:
    """Construit le maillage et les détecteurs livrés du routeur observé (14 réseaux)."""
    design = NocDesign(scenario)
    bundle = MonitorBundle("router", _router_nets(design), list(ROUTER_PRESETS), check_end=False)
    bundle.validate(design)
    return design, bundle
