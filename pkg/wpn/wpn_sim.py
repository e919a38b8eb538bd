"""
Discrete-event simulation of a wireless processor network hosting one neuron per mote.

Each mote keeps only its own weight row, bias and a cache of the outputs it
is coupled to. Announcements travel as one-hop broadcasts and multi-hop
unicasts over a slotted radio medium (see radio). The simpy clock counts
integer slots.

Triggers:
- periodic: a network-wide clock updates every mote in id order once per
  period, then checks convergence over the whole round
- on_receive: a mote updates a few jittered slots after its cache changes
  and keeps updating while its own output still moves by epsilon or more

Under on_receive a mote computes from whatever its cache holds, so two
coupled motes can both flip before either hears the other. Three rules damp
such stale-cache races:
- a mote holds its next update while any of its own announcements is
  still undelivered
- every readout flip doubles the mote's jitter window (capped), so motes
  that keep flipping against each other drift apart in time
- an episode only counts as converged once the medium is idle

A threshold episode that stops unconverged after more flips than the
asynchronous bound 3 sum |w_ij| reports stop_reason "flip_bound_exceeded";
other stops report "step_limit", "time_limit" or "stalled".

Restarts: when the final readout of a graph problem is not an independent
perfect dominating set and episodes remain, the run starts over from a fresh
seeded initial state. Counters accumulate across episodes.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import simpy

from wpn.cost_model import NonIntegerWeightsError, message_complexity, state_change_bound
from wpn.energy_model import (
    CompiledProblem,
    DimensionMismatchError,
    EnergyConfig,
    bipolar_parameters,
    local_gradient,
    neighbor_sum,
)
from wpn.graph_core import (
    Graph,
    is_connected_in_graph,
    is_dominating_set,
    is_independent_perfect_dominating,
)
from wpn.neuro_dynamics import (
    DEFAULT_DT,
    DEFAULT_MU,
    DEFAULT_TAU,
    ConvergenceCriterion,
    EnergyTrajectory,
    NumericalDivergenceError,
    TemperatureSchedule,
    engine_liapunov,
    euler_update,
    mfa_update,
    random_initial_state,
    readout_set,
    row_field,
    sigmoid,
    threshold,
)
from wpn.radio import (
    BROADCAST,
    MacConfig,
    Message,
    Payload,
    Transmission,
    backoff_slots,
    mac_arbitrate,
    receivers_of,
    route,
)

logger = logging.getLogger(__name__)


TRIGGERS = ("periodic", "on_receive")
FANOUTS = ("coupled", "all")
SIM_ENGINES = ("gradient", "hopfield", "mfa", "threshold")
JITTER_MIN_SLOTS = 1
JITTER_MAX_SLOTS = 8
JITTER_MAX_EXPONENT = 10
DEFAULT_DELTA = 1e-4
DEFAULT_MAX_TIME = 10.0


class EmbeddingError(ValueError):
    """Raised when coupled neurons sit on motes the topology cannot connect."""
    pass


class MoteDivergenceError(NumericalDivergenceError):
    """Raised when a mote's neuron value becomes non-finite."""

    def __init__(self, mote_id: int, sim_time: float, step: int = 0):
        self.mote_id = mote_id
        self.sim_time = sim_time
        super().__init__(step, f"mote {mote_id} at t={sim_time!r}s")
        # simpy re-raises process failures as type(e)(*e.args).
        self.args = (mote_id, sim_time, step)


@dataclass(frozen=True)
class SimulationOptions:
    engine: str = "gradient"
    trigger: str = "periodic"
    period: int | None = None  # slots; None derives it from the announcement plan
    delta: float = DEFAULT_DELTA
    max_time: float = DEFAULT_MAX_TIME
    fanout: str = "coupled"
    trace: bool = False
    dt: float = DEFAULT_DT
    mode: str = "euler_memory"
    tau: float = DEFAULT_TAU
    mu: float = DEFAULT_MU
    schedule: TemperatureSchedule = field(default_factory=TemperatureSchedule)

    def __post_init__(self) -> None:
        if self.engine not in SIM_ENGINES:
            raise ValueError(f"unknown engine: {self.engine}")
        if self.trigger not in TRIGGERS:
            raise ValueError(f"unknown trigger: {self.trigger}")
        if self.fanout not in FANOUTS:
            raise ValueError(f"unknown fanout: {self.fanout}")
        if self.period is not None and self.period < 1:
            raise ValueError(f"period must be >= 1 slot, got {self.period}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if not self.max_time > 0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")


# =============================================================================
# Motes
# =============================================================================

@dataclass
class CacheEntry:
    value: float
    k: int
    delivered: int  # slot


class Mote:
    """
    One processing node hosting neuron `id`.

    Holds its weight row over the coupled neurons, its bias, and for gradient
    dynamics the problem neighborhoods it needs to evaluate its own gradient
    component. No mote sees another mote's weights.
    """

    def __init__(
        self,
        mote_id: int,
        coupled: np.ndarray,
        weights: np.ndarray,
        bias: float,
        lam: float,
        neighbors: tuple[int, ...] = (),
        second: dict[int, tuple[int, ...]] | None = None,
        cfg: EnergyConfig | None = None,
        theta: float = 0.0,
    ):
        self.id = mote_id
        self.coupled = coupled
        self.weights = weights
        self.bias = bias
        self.theta = theta
        self.lam = lam
        self.neighbors = neighbors
        self.second = second or {}
        self.cfg = cfg

        keys = set(coupled.tolist())
        if cfg is not None:
            keys.update(neighbors)
            for j in neighbors:
                keys.update(self.second[j])
        keys.discard(mote_id)
        self.cache_keys = tuple(sorted(keys))

        self.u = 0.0
        self.z = 0.5
        self.k = 0
        self.announced: float | None = None
        self.neighbor_cache: dict[int, CacheEntry] = {}
        self.outbox: simpy.Store | None = None
        self.pending = False
        self.last_delta = math.inf
        self.in_flight = 0
        self.jitter_exponent = 0

    def reset(self, u: float, z: float, bipolar: bool) -> None:
        self.u = u
        self.z = z
        self.k = 0
        self.announced = None
        self.pending = False
        self.last_delta = math.inf
        self.in_flight = 0
        self.jitter_exponent = 0
        default = 0.0 if bipolar else 0.5
        self.neighbor_cache = {j: CacheEntry(default, -1, 0) for j in self.cache_keys}

    def output(self, engine: str) -> float:
        return self.u if engine == "mfa" else self.z

    def receive(self, payload: Payload, now: int) -> bool:
        """Cache an announcement; stale ones (lower k) are ignored."""
        entry = self.neighbor_cache.get(payload.neuron)
        if entry is None or payload.k < entry.k:
            return False
        changed = entry.value != payload.value
        entry.value = payload.value
        entry.k = payload.k
        entry.delivered = now
        return changed

    def storage(self) -> dict:
        """Real-valued vectors and scalars this mote holds."""
        return {
            "vectors": [len(self.weights), len(self.neighbor_cache)],
            "scalars": 4,  # u, z, bias, announced value
        }

    # -- local computation --------------------------------------------------

    def _cached(self, indices) -> np.ndarray:
        return np.array([self.neighbor_cache[j].value for j in indices.tolist()])

    def _value(self, j: int) -> float:
        return self.z if j == self.id else self.neighbor_cache[j].value

    def hopfield_drive(self) -> float:
        return row_field(self.weights, self._cached(self.coupled)) + self.bias

    def gradient_drive(self) -> float:
        if self.cfg is None:
            return self.hopfield_drive()
        s_own = neighbor_sum(self._value(l) for l in self.neighbors)
        neighbor_s = [neighbor_sum(self._value(l) for l in self.second[j]) for j in self.neighbors]
        neighbor_z = [self._value(j) for j in self.neighbors]
        return -local_gradient(self.cfg, s_own, neighbor_s, neighbor_z)

    def mfa_field(self) -> float:
        return row_field(self.weights / 4.0, self._cached(self.coupled)) + self.theta

    def step(self, options: SimulationOptions) -> None:
        engine = options.engine
        if engine == "gradient":
            self.u = euler_update(self.u, self.gradient_drive(), options.dt)
            self.z = sigmoid(self.u, self.lam)
        elif engine == "hopfield":
            drive = self.hopfield_drive()
            self.u = euler_update(self.u, drive, options.dt) if options.mode == "euler_memory" else drive
            self.z = sigmoid(self.u, self.lam)
        elif engine == "mfa":
            temperature = options.schedule.temperature(self.k)
            self.u = mfa_update(self.u, options.tau * options.mu, self.mfa_field(), temperature)
            self.z = (1.0 + self.u) / 2.0
        else:
            self.u = self.hopfield_drive()
            self.z = threshold(self.u)
        self.k += 1


@dataclass(frozen=True)
class Announcement:
    """How one mote reaches every mote that caches its output."""
    broadcast: bool
    unicasts: tuple[tuple[int, ...], ...]


@dataclass
class WpnState:
    """An embedded problem: motes on a topology, identity placement."""
    problem: CompiledProblem
    topology: Graph
    motes: list[Mote]
    placement: str = "identity"
    _plans: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.motes)

    def announcement_plan(self, fanout: str) -> list[Announcement]:
        if fanout not in self._plans:
            self._plans[fanout] = [self._plan_for(m, fanout) for m in self.motes]
        return self._plans[fanout]

    def _plan_for(self, mote: Mote, fanout: str) -> Announcement:
        adjacent = set(self.topology.neighbors[mote.id])
        if fanout == "all":
            targets = [j for j in range(self.size) if j != mote.id]
            broadcast = False
        else:
            # Cache keys are symmetric: i caches j exactly when j caches i.
            targets = [j for j in mote.cache_keys if j not in adjacent]
            broadcast = any(j in adjacent for j in mote.cache_keys)
        paths = []
        for j in targets:
            path = route(self.topology, mote.id, j)
            if not path:
                raise EmbeddingError(f"motes {mote.id} and {j} must exchange outputs but are not connected")
            paths.append(tuple(path))
        return Announcement(broadcast=broadcast, unicasts=tuple(paths))

    def auto_period(self, fanout: str) -> int:
        """(max hops + 1) x (max per-mote transmissions per round + 1) slots."""
        load = [0] * self.size
        max_hops = 1
        for mote, plan in zip(self.motes, self.announcement_plan(fanout)):
            if plan.broadcast:
                load[mote.id] += 1
            for path in plan.unicasts:
                max_hops = max(max_hops, len(path) - 1)
                for sender in path[:-1]:
                    load[sender] += 1
        return (max_hops + 1) * (max(load, default=0) + 1)


def embed(
    prob: CompiledProblem,
    topology: Graph,
    placement: str = "identity",
) -> WpnState:
    """Mote i hosts neuron i with its own weight row and bias."""
    if placement != "identity":
        raise ValueError(f"unknown placement: {placement}")
    if prob.size != topology.n:
        raise DimensionMismatchError(f"problem has {prob.size} neurons, topology has {topology.n} motes")

    p = prob.quadratic
    _, theta = bipolar_parameters(p.W, p.b)
    g = prob.graph
    motes = []
    for i in range(p.size):
        idx, weights = p.coupling_rows[i]
        neighbors = g.neighbors[i] if g is not None else ()
        second = {j: g.neighbors[j] for j in neighbors} if g is not None else {}
        motes.append(Mote(
            mote_id=i,
            coupled=idx.copy(),
            weights=weights.copy(),
            bias=float(p.b[i]),
            lam=p.lam,
            neighbors=neighbors,
            second=second,
            cfg=prob.cfg if g is not None else None,
            theta=float(theta[i]),
        ))

    wpn = WpnState(problem=prob, topology=topology, motes=motes, placement=placement)
    wpn.announcement_plan("coupled")
    logger.debug(
        f"Embedded {p.size} neurons: weight nonzeros={sum(len(m.weights) for m in motes)}"
    )
    return wpn


# =============================================================================
# Reports
# =============================================================================

@dataclass
class RunReport:
    engine: str
    seed: int
    total_messages: int
    delivered: int
    collided: int
    retransmissions: int
    attempts: int
    undelivered: int
    state_changes: int
    updates: int
    simulated_time: float
    energy_trajectory: EnergyTrajectory
    final_z: np.ndarray
    validity: dict
    episodes_used: int
    converged: bool
    per_mote_sent: list[int]
    stop_reason: str
    trace: list[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "seed": self.seed,
            "total_messages": self.total_messages,
            "delivered": self.delivered,
            "collided": self.collided,
            "retransmissions": self.retransmissions,
            "attempts": self.attempts,
            "undelivered": self.undelivered,
            "state_changes": self.state_changes,
            "updates": self.updates,
            "simulated_time": self.simulated_time,
            "energy_trajectory": {
                "steps": len(self.energy_trajectory),
                "final_energy": self.energy_trajectory.final_energy,
            },
            "final_z": [float(x) for x in self.final_z],
            "readout": sorted(readout_set(self.final_z)),
            "validity": dict(self.validity),
            "episodes_used": self.episodes_used,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "per_mote_sent": list(self.per_mote_sent),
        }

    def trace_tsv(self) -> str:
        lines = ["time\tsrc\tdst\tchannel\toutcome"]
        for t, src, dst, channel, outcome in self.trace:
            target = "broadcast" if dst == BROADCAST else str(dst)
            lines.append(f"{t!r}\t{src}\t{target}\t{channel}\t{outcome}")
        return "\n".join(lines) + "\n"


@dataclass
class MessageStats:
    total: int
    delivered: int
    collided: int
    attempts: int
    retransmissions: int
    undelivered: int
    per_mote_sent: list[int]
    sent_histogram: dict[int, int]
    envelope: int
    envelope_ratio: float

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "delivered": self.delivered,
            "collided": self.collided,
            "attempts": self.attempts,
            "retransmissions": self.retransmissions,
            "undelivered": self.undelivered,
            "sent_histogram": dict(sorted(self.sent_histogram.items())),
            "envelope": self.envelope,
            "envelope_ratio": self.envelope_ratio,
        }


def measure_messages(report: RunReport) -> MessageStats:
    """Totals, per-mote histogram and the ratio to the m N^3 envelope."""
    n = len(report.per_mote_sent)
    envelope = message_complexity(n, max(1, report.episodes_used))
    return MessageStats(
        total=report.total_messages,
        delivered=report.delivered,
        collided=report.collided,
        attempts=report.attempts,
        retransmissions=report.retransmissions,
        undelivered=report.undelivered,
        per_mote_sent=list(report.per_mote_sent),
        sent_histogram=dict(Counter(report.per_mote_sent)),
        envelope=envelope,
        envelope_ratio=report.total_messages / envelope,
    )


def validity_of(prob: CompiledProblem, z: np.ndarray) -> dict:
    g = prob.graph
    if g is None:
        return {"ipds": None, "dominating": None, "connected": None}
    chosen = readout_set(z)
    return {
        "ipds": is_independent_perfect_dominating(g, chosen),
        "dominating": is_dominating_set(g, chosen),
        "connected": is_connected_in_graph(g, chosen),
    }


# =============================================================================
# Simulation
# =============================================================================

class _Medium:
    """Collects each slot's transmissions and arbitrates them at the slot's end."""

    def __init__(self, run: _EpisodeRun):
        self.run = run
        self.env = run.env
        self.pending: dict[int, list] = {}

    def submit(self, slot: int, tx: Transmission, message: Message) -> simpy.Event:
        done = self.env.event()
        if slot not in self.pending:
            self.pending[slot] = []
            self.env.process(self._arbitrate(slot))
        self.pending[slot].append((tx, message, done))
        return done

    def _arbitrate(self, slot: int):
        yield self.env.timeout(1)
        entries = self.pending.pop(slot)
        result = mac_arbitrate([tx for tx, _, _ in entries], self.run.wpn.topology, self.run.mac)
        delivered = set(result.delivered)
        for idx, (tx, message, done) in enumerate(entries):
            ok = idx in delivered
            self.run.on_transmission(message, ok, slot)
            done.succeed(ok)


class _EpisodeRun:
    """One convergence episode on a fresh simpy environment."""

    def __init__(self, sim: _Simulation, init_u: np.ndarray, init_z: np.ndarray):
        self.sim = sim
        self.wpn = sim.wpn
        self.mac = sim.mac
        self.options = sim.options
        self.crit = sim.crit
        self.rng = sim.rng
        self.env = simpy.Environment()
        self.medium = _Medium(self)
        self.trajectory = EnergyTrajectory()
        self.converged = False
        self.updates_done = False
        self.stopped_by: str | None = None
        self.stop_reason = "stalled"
        self.updates = 0
        self.state_changes = 0
        self.in_flight = 0  # hop messages enqueued but not yet delivered

        engine = self.options.engine
        bipolar = engine == "mfa"
        for m in self.wpn.motes:
            u, z = float(init_u[m.id]), float(init_z[m.id])
            if engine == "mfa":
                u = 2.0 * z - 1.0
            elif engine == "threshold":
                z = 1.0 if z > 0.5 else 0.0
            m.reset(u, z, bipolar)
            m.outbox = simpy.Store(self.env)
        self.plan = self.wpn.announcement_plan(self.options.fanout)

    # -- accounting ---------------------------------------------------------

    def global_z(self) -> np.ndarray:
        return np.array([m.z for m in self.wpn.motes])

    def record(self, step: int) -> None:
        z = self.global_z()
        prob = self.wpn.problem
        self.trajectory.record(step, prob.energy(z), engine_liapunov(self.options.engine, prob, z))

    def enqueue(self, message: Message) -> None:
        message.enqueued = self.env.now
        self.in_flight += 1
        self.sim.total_messages += 1
        self.sim.per_mote_sent[message.src] += 1
        self.wpn.motes[message.src].outbox.put(message)

    def announce(self, mote: Mote) -> None:
        value = mote.output(self.options.engine)
        mote.announced = value
        payload = Payload(neuron=mote.id, value=value, k=mote.k)
        plan = self.plan[mote.id]
        if plan.broadcast:
            mote.in_flight += 1
            self.enqueue(Message(src=mote.id, dst=BROADCAST, payload=payload))
        for path in plan.unicasts:
            mote.in_flight += 1
            self.enqueue(Message(src=path[0], dst=path[1], payload=payload, path=path, hop=0))

    def on_transmission(self, message: Message, ok: bool, slot: int) -> None:
        sim = self.sim
        sim.attempts += 1
        if self.options.trace:
            sim.trace.append((
                self.mac.seconds(sim.time_offset + slot),
                message.src,
                message.dst,
                message.channel,
                "delivered" if ok else "collided",
            ))
        if not ok:
            sim.collided += 1
            return

        sim.delivered += 1
        self.in_flight -= 1
        now = self.env.now
        message.delivered = now
        if message.dst == message.target:
            # Last hop of the announcement.
            self.wpn.motes[message.origin].in_flight -= 1
        for r in receivers_of(self.wpn.topology, message.src, message.dst):
            if message.dst != BROADCAST and r != message.target:
                hop = message.hop + 1
                self.enqueue(Message(
                    src=r,
                    dst=message.path[hop + 1],
                    payload=message.payload,
                    path=message.path,
                    hop=hop,
                ))
                continue
            mote = self.wpn.motes[r]
            if mote.receive(message.payload, now) and self.options.trigger == "on_receive":
                self.schedule_update(mote)

    # -- processes ----------------------------------------------------------

    def transmitter(self, mote: Mote):
        while True:
            message = yield mote.outbox.get()
            while True:
                if self.mac.kind == "slotted_aloha":
                    while self.rng.random() >= self.mac.p_transmit:
                        yield self.env.timeout(1)
                    channel = int(self.rng.integers(self.mac.channels))
                else:
                    channel = mote.id % self.mac.channels
                message.channel = channel
                message.transmitted = self.env.now
                receivers = receivers_of(self.wpn.topology, message.src, message.dst)
                tx = Transmission(mote=mote.id, channel=channel, receivers=receivers)
                ok = yield self.medium.submit(self.env.now, tx, message)
                if ok:
                    break
                self.sim.retransmissions += 1
                yield self.env.timeout(backoff_slots(self.rng))

    def update(self, mote: Mote) -> float:
        """Step one neuron; announce when its output moved by more than delta."""
        before = mote.z
        mote.step(self.options)
        if not (math.isfinite(mote.u) and math.isfinite(mote.z)):
            raise MoteDivergenceError(mote.id, self.mac.seconds(self.sim.time_offset + self.env.now), mote.k)
        self.updates += 1
        self.sim.updates += 1
        if (before > 0.5) != (mote.z > 0.5):
            self.state_changes += 1
            self.sim.state_changes += 1
            mote.jitter_exponent = min(mote.jitter_exponent + 1, JITTER_MAX_EXPONENT)
        if abs(mote.output(self.options.engine) - mote.announced) > self.options.delta:
            self.announce(mote)
        return abs(mote.z - before)

    def at_floor(self, k: int) -> bool:
        return self.options.engine != "mfa" or self.options.schedule.at_floor(k)

    def clock(self, period: int):
        """Lockstep rounds: every mote updates from its cache, in id order."""
        for round_index in range(1, self.crit.max_steps + 1):
            yield self.env.timeout(period)
            # Let this slot's deliveries land before anyone computes.
            yield self.env.timeout(0)
            settled = self.in_flight == 0
            delta = max(self.update(m) for m in self.wpn.motes)
            self.record(round_index)
            if delta < self.crit.epsilon and settled and self.at_floor(round_index - 1):
                self.converged = True
                break
        else:
            self.stopped_by = "step_limit"
        self.updates_done = True

    def schedule_update(self, mote: Mote) -> None:
        if mote.pending or self.updates_done:
            return
        mote.pending = True
        window = JITTER_MAX_SLOTS << mote.jitter_exponent
        jitter = int(self.rng.integers(JITTER_MIN_SLOTS, window + 1))
        self.env.process(self.delayed_update(mote, jitter))

    def delayed_update(self, mote: Mote, delay: int):
        yield self.env.timeout(delay)
        while mote.in_flight and not self.updates_done:
            yield self.env.timeout(backoff_slots(self.rng))
        mote.pending = False
        if self.updates_done:
            return
        if self.updates >= self.crit.max_steps * self.wpn.size:
            self.updates_done = True
            self.stopped_by = "step_limit"
            return
        mote.last_delta = self.update(mote)
        self.record(self.updates)
        if mote.last_delta >= self.crit.epsilon or not self.at_floor(mote.k - 1):
            self.schedule_update(mote)

    # -- driver ---------------------------------------------------------------

    def run(self, limit_slots: int) -> None:
        env = self.env
        for m in self.wpn.motes:
            env.process(self.transmitter(m))
        self.record(0)
        for m in self.wpn.motes:
            self.announce(m)

        if self.options.trigger == "periodic":
            period = self.options.period or self.wpn.auto_period(self.options.fanout)
            env.process(self.clock(period))
        else:
            for m in self.wpn.motes:
                self.schedule_update(m)

        while True:
            upcoming = env.peek()
            if upcoming == math.inf:
                break
            if upcoming > limit_slots:
                logger.warning(f"Episode stopped at the simulated time limit ({limit_slots} slots)")
                self.updates_done = True
                self.stopped_by = self.stopped_by or "time_limit"
                break
            env.step()

        if self.options.trigger == "on_receive":
            # A drained event queue means every announcement landed and every
            # mote recomputed after its last cache change.
            self.converged = self.stopped_by is None and all(
                m.last_delta < self.crit.epsilon and self.at_floor(m.k - 1)
                for m in self.wpn.motes
            )
        if self.converged:
            self.stop_reason = "converged"
        else:
            self.stop_reason = self.stopped_by or "stalled"


class _Simulation:
    def __init__(self, wpn, mac, crit, seed, options):
        self.wpn = wpn
        self.mac = mac
        self.crit = crit
        self.seed = seed
        self.options = options
        children = np.random.SeedSequence(seed).spawn(crit.max_episodes + 1)
        self.rng = np.random.default_rng(children[0])
        self.episode_seeds = children[1:]

        self.total_messages = 0
        self.delivered = 0
        self.collided = 0
        self.attempts = 0
        self.retransmissions = 0
        self.state_changes = 0
        self.updates = 0
        self.per_mote_sent = [0] * wpn.size
        self.trace: list[tuple] = []
        self.time_offset = 0
        self.flip_bound: int | None = None
        if options.engine == "threshold":
            try:
                self.flip_bound = state_change_bound(wpn.problem.quadratic.W)
            except NonIntegerWeightsError:
                logger.debug("Weights are not integer; no flip bound for this run")


def simulate(
    wpn: WpnState,
    mac: MacConfig,
    crit: ConvergenceCriterion,
    seed: int,
    options: SimulationOptions = SimulationOptions(),
) -> RunReport:
    """
    Run the distributed dynamics until quiescence or the limits.

    Episode 0 starts from random_initial_state(K, lambda, seed), the same state
    a centralized episode with that seed starts from. Fully deterministic per seed.
    """
    started = time.time()
    sim = _Simulation(wpn, mac, crit, seed, options)
    prob = wpn.problem
    lam = prob.quadratic.lam
    limit_slots = max(1, math.ceil(options.max_time / mac.slot_time))

    episode: _EpisodeRun | None = None
    episodes_used = 0
    for index in range(crit.max_episodes):
        source = seed if index == 0 else np.random.default_rng(sim.episode_seeds[index - 1])
        init = random_initial_state(wpn.size, lam, source)
        episode = _EpisodeRun(sim, init.u, init.z)
        episode.run(max(1, limit_slots - sim.time_offset))
        sim.time_offset += int(episode.env.now)
        episodes_used = index + 1

        if prob.graph is None or validity_of(prob, episode.global_z())["ipds"]:
            break
        if sim.time_offset >= limit_slots:
            break
        logger.debug(f"Episode {index} ended without a valid readout; restarting")

    final_z = episode.global_z()
    stop_reason = episode.stop_reason
    if not episode.converged and sim.flip_bound is not None and episode.state_changes > sim.flip_bound:
        stop_reason = "flip_bound_exceeded"
        logger.warning(
            f"Seed {seed}: {episode.state_changes} flips exceed the asynchronous bound {sim.flip_bound}; "
            f"motes updated from stale caches"
        )
    report = RunReport(
        engine=options.engine,
        seed=seed,
        total_messages=sim.total_messages,
        delivered=sim.delivered,
        collided=sim.collided,
        retransmissions=sim.retransmissions,
        attempts=sim.attempts,
        undelivered=sim.total_messages - sim.delivered,
        state_changes=sim.state_changes,
        updates=sim.updates,
        simulated_time=mac.seconds(sim.time_offset),
        energy_trajectory=episode.trajectory,
        final_z=final_z,
        validity=validity_of(prob, final_z),
        episodes_used=episodes_used,
        converged=episode.converged,
        per_mote_sent=sim.per_mote_sent,
        stop_reason=stop_reason,
        trace=sim.trace,
    )
    logger.info(
        f"Simulation completed: engine={options.engine}, seed={seed}, episodes={episodes_used}, "
        f"messages={report.total_messages}, collided={report.collided}, "
        f"t={report.simulated_time:.6g}s ({time.time() - started:.2f}s)"
    )
    return report
