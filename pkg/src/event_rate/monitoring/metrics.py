from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

MODE_LABEL = ["mode"]

TRIGGERS = Counter("event_rate_triggers_total", "Trigger events emitted by the sensor", MODE_LABEL, registry=REGISTRY)
RECEPTIONS = Counter("event_rate_receptions_total", "Packets decoded by the controller", MODE_LABEL, registry=REGISTRY)
BITS_SENT = Counter("event_rate_bits_sent_total", "Payload bits delivered over the channel", MODE_LABEL, registry=REGISTRY)
ZENO_ABORTS = Counter("event_rate_zeno_aborts_total", "Runs aborted by the trigger-count guard", MODE_LABEL, registry=REGISTRY)
UNDECODABLE = Counter("event_rate_undecodable_total", "Packets whose parity matched no interval", MODE_LABEL, registry=REGISTRY)

POST_JUMP_ERROR = Histogram(
    "event_rate_post_jump_error_ratio",
    "|z(t_c+)| / J after each reception",
    MODE_LABEL,
    buckets=(0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0, 1.5),
    registry=REGISTRY,
)
REALIZED_RATE = Gauge("event_rate_realized_bits_per_second", "Realized bit rate of the latest run", MODE_LABEL, registry=REGISTRY)


def write_metrics(path: str) -> None:
    write_to_textfile(path, REGISTRY)
