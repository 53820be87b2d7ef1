"""
Filtre de flou gaussien 3x3 en flux (image 16x12, un pixel par cycle).

Trois sous-modules : récepteur (écriture dans la mémoire d'image), cœur de calcul
(noyau [[1,2,1],[2,4,2],[1,2,1]]/16, bords répliqués) alimentant une FIFO de 4 entrées,
et émetteur. Les interfaces d'entrée et de sortie utilisent {user, valid, last, ready}.

La mémoire d'image tient lieu des deux files de lignes : c'est un stockage de données,
hors des registres de contrôle visés par les basculements Case 1.
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.designs.base import DATA, NetBuilder, inp, out, reg, sub
from src.monitors.bundle import MonitorBundle, SelectorPreset
from src.sim.design import Design, StimulusProgram
from src.utils.errors import ConfigurationError

WIDTH, HEIGHT = 16, 12
FIFO_DEPTH = 4
KERNEL = ((1, 2, 1), (2, 4, 2), (1, 2, 1))
IDLE, RUN, DONE = 0, 1, 2

Beat = Tuple[int, int, int]


@dataclass
class GausStimulus(StimulusProgram):
    """Banc de test : envoie l'image ligne par ligne, user sur le premier pixel."""

    image: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.image) != HEIGHT or any(len(row) != WIDTH for row in self.image):
            raise ConfigurationError(f"L'image doit faire {WIDTH}x{HEIGHT} pixels")
        if any(not 0 <= p <= 0xFF for row in self.image for p in row):
            raise ConfigurationError("Pixels hors de la plage 8 bits")
        self._ptr = 0
        self._offered = False

    def reset(self) -> None:
        self._ptr = 0
        self._offered = False

    def drive(self, cycle: int, design: Design) -> dict:
        p = self._ptr
        valid = p < WIDTH * HEIGHT
        self._offered = valid and design.read_raw("s_ready") == 1
        return {
            "s_valid": int(valid),
            "s_user": int(p == 0),
            "s_last": int(valid and p % WIDTH == WIDTH - 1),
            "s_data": self.image[p // WIDTH][p % WIDTH] if valid else 0,
            "m_ready": 1,
        }

    def settle(self, design: Design) -> None:
        if self._offered:
            self._ptr += 1


class GausDesign(Design):
    """Flou gaussien en flux."""

    design_id = "gaus"

    def __init__(self):
        super().__init__([
            inp("s_valid", 1),
            inp("s_user", 1),
            inp("s_last", 1),
            inp("m_ready", 1),
            inp("s_data", 8, DATA),
            out("s_ready", 1),
            out("m_valid", 1),
            out("m_user", 1),
            out("m_last", 1),
            out("m_data", 8, DATA),
            sub("recv/wr_en", 1),
            sub("recv/line_done", 1),
            sub("core/out_en", 1),
            sub("core/line_done", 1),
            sub("send/pop", 1),
            sub("send/line_done", 1),
            reg("recv/state", 2),
            reg("recv/x", 4),
            reg("recv/y", 4),
            reg("core/state", 2),
            reg("core/x", 4),
            reg("core/y", 4),
            reg("send/state", 2),
            reg("send/x", 4),
            reg("send/y", 4),
            reg("fifo/wptr", 3),
            reg("fifo/rptr", 3),
        ])
        self._frame = [[0] * WIDTH for _ in range(HEIGHT)]
        self._fifo: List[Beat] = [(0, 0, 0)] * FIFO_DEPTH
        self._record: List[Beat] = []

    def _reset_state(self) -> None:
        self._frame = [[0] * WIDTH for _ in range(HEIGHT)]
        self._fifo = [(0, 0, 0)] * FIFO_DEPTH
        self._record = []
        self._combinational()

    def _combinational(self) -> None:
        self._v["s_ready"] = int(self._v["recv/state"] != DONE)

    def _after_flip(self, ref) -> None:
        self._combinational()

    def _step(self, inputs: dict) -> None:
        cur = dict(self._v)
        v = self._v
        for pulse in ("recv/wr_en", "recv/line_done", "core/out_en", "core/line_done",
                      "send/pop", "send/line_done"):
            v[pulse] = 0
        self._receiver(cur, inputs)
        self._core(cur)
        self._sender(cur, inputs)
        self._combinational()

    def _receiver(self, cur: dict, inputs: dict) -> None:
        v = self._v
        state = cur["recv/state"]
        if not (inputs["s_valid"] and cur["s_ready"]) or state == DONE:
            return
        data = inputs["s_data"]
        if inputs["s_user"]:
            self._frame[0][0] = data
            v["recv/x"], v["recv/y"], v["recv/state"] = 1, 0, RUN
            v["recv/wr_en"] = 1
            return
        if state != RUN:
            return
        x, y = cur["recv/x"], cur["recv/y"]
        if x < WIDTH and y < HEIGHT:
            self._frame[y][x] = data
        v["recv/wr_en"] = 1
        if inputs["s_last"] or x == WIDTH - 1:
            v["recv/x"] = 0
            v["recv/y"] = self._mask("recv/y", y + 1)
            v["recv/line_done"] = 1
            if y + 1 >= HEIGHT:
                v["recv/state"] = DONE
        else:
            v["recv/x"] = self._mask("recv/x", x + 1)

    def _stored(self, cur: dict) -> int:
        state = cur["recv/state"]
        if state == DONE:
            return WIDTH * HEIGHT
        if state == RUN:
            return cur["recv/y"] * WIDTH + cur["recv/x"]
        return 0

    def _core(self, cur: dict) -> None:
        v = self._v
        state = cur["core/state"]
        if state == IDLE:
            if cur["recv/state"] != IDLE:
                v["core/state"] = RUN
            return
        if state != RUN:
            return
        x, y = cur["core/x"], cur["core/y"]
        need = WIDTH * min(y + 1, HEIGHT - 1) + min(x + 1, WIDTH - 1)
        count = (cur["fifo/wptr"] - cur["fifo/rptr"]) & 0x7
        if self._stored(cur) <= need or count >= FIFO_DEPTH:
            return
        beat = (self._blur(y, x), int(x == 0 and y == 0), int(x == WIDTH - 1))
        self._fifo[cur["fifo/wptr"] % FIFO_DEPTH] = beat
        v["fifo/wptr"] = (cur["fifo/wptr"] + 1) & 0x7
        v["core/out_en"] = 1
        if x >= WIDTH - 1:
            v["core/x"] = 0
            v["core/y"] = self._mask("core/y", y + 1)
            v["core/line_done"] = 1
            if y + 1 >= HEIGHT:
                v["core/state"] = DONE
        else:
            v["core/x"] = x + 1

    def _blur(self, y: int, x: int) -> int:
        acc = 0
        for dy in (-1, 0, 1):
            row = self._frame[min(max(y + dy, 0), HEIGHT - 1)]
            for dx in (-1, 0, 1):
                acc += KERNEL[dy + 1][dx + 1] * row[min(max(x + dx, 0), WIDTH - 1)]
        return (acc + 8) >> 4

    def _sender(self, cur: dict, inputs: dict) -> None:
        v = self._v
        state = cur["send/state"]
        if state == DONE:
            v["m_valid"] = 0
            return
        transfer = cur["m_valid"] and inputs["m_ready"]
        if transfer:
            self._record.append((cur["m_data"], cur["m_user"], cur["m_last"]))
            x, y = cur["send/x"], cur["send/y"]
            if x >= WIDTH - 1:
                v["send/x"] = 0
                v["send/y"] = self._mask("send/y", y + 1)
                v["send/line_done"] = 1
                if y + 1 >= HEIGHT:
                    v["send/state"] = DONE
                    v["m_valid"] = 0
                    return
            else:
                v["send/x"] = x + 1
        if cur["m_valid"] and not transfer:
            return
        count = (cur["fifo/wptr"] - cur["fifo/rptr"]) & 0x7
        if count == 0:
            v["m_valid"] = 0
            return
        data, user, last = self._fifo[cur["fifo/rptr"] % FIFO_DEPTH]
        v["m_valid"], v["m_data"], v["m_user"], v["m_last"] = 1, data, user, last
        v["fifo/rptr"] = (cur["fifo/rptr"] + 1) & 0x7
        v["send/pop"] = 1
        if state == IDLE:
            v["send/state"] = RUN

    def done(self) -> bool:
        return self._v["send/state"] == DONE

    def outputs(self) -> List[Beat]:
        return list(self._record)

    def oracle_output(self, stimulus: GausStimulus) -> List[Beat]:
        return gaus_oracle(stimulus.image)


def blur_reference(image) -> np.ndarray:
    """Flou 3x3 de référence (bords répliqués, arrondi au plus proche)."""
    img = np.asarray(image, dtype=np.int64)
    padded = np.pad(img, 1, mode="edge")
    kernel = np.array(KERNEL, dtype=np.int64)
    acc = np.zeros_like(img)
    for dy in range(3):
        for dx in range(3):
            acc += kernel[dy, dx] * padded[dy:dy + img.shape[0], dx:dx + img.shape[1]]
    return (acc + 8) >> 4


def gaus_oracle(image) -> List[Beat]:
    """Flux de sortie attendu : (pixel, user, last) en ordre ligne par ligne."""
    blurred = blur_reference(image)
    beats = []
    for y in range(HEIGHT):
        for x in range(WIDTH):
            beats.append((int(blurred[y, x]), int(x == 0 and y == 0), int(x == WIDTH - 1)))
    return beats


def _gaus_nets(d: GausDesign) -> list:
    nets = []

    n = NetBuilder("GAUS_1", d)  # démarrage successif des trois sous-modules
    n.on("P0", "P1", "recv/state", 2, target=RUN)
    n.on("P1", "P2", "core/state", 2, target=RUN)
    n.on("P2", "P3", "send/state", 2, target=RUN)
    n.on("P3", "End", "send/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("GAUS_2", d)  # lignes calculées puis émises en alternance
    n.on("P0", "P1", "recv/wr_en", 3, index=1)
    n.on("P1", "A", "recv/y", 3, index=1)
    n.on("A", "B", "core/y", 1)
    n.on("B", "A", "send/y", 1)
    n.on("A", "End", "send/y", 3, index=HEIGHT, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("GAUS_3", d)  # mi-ligne puis fin de chaque sous-module
    n.on("P0", "P1", "recv/x", 4, target=8, index=1)
    n.on("P1", "P2", "core/x", 4, target=8, index=1)
    n.on("P2", "P3", "send/x", 4, target=8, index=1)
    n.on("P3", "P4", "recv/state", 2, target=DONE)
    n.on("P4", "P5", "core/state", 2, target=DONE)
    n.on("P5", "End", "send/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))
    return nets


GAUS_PRESETS = [
    SelectorPreset(1, 1),
    SelectorPreset(2, 1),
    SelectorPreset(3, 1), SelectorPreset(3, 2), SelectorPreset(3, 3), SelectorPreset(3, 4),
]


def build_gaus() -> Tuple[GausDesign, MonitorBundle]:
    """Construit le filtre gaussien et ses détecteurs livrés (3 réseaux)."""
    design = GausDesign()
    bundle = MonitorBundle("gaus", _gaus_nets(design), list(GAUS_PRESETS), check_end=True)
    bundle.validate(design)
    return design, bundle
