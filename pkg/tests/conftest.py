from dataclasses import dataclass, field


@dataclass
class StubFrame:
    """Minimal object satisfying the qdisc frame contract."""

    pcp: int = 0
    physical_bytes: int = 101
    txtime: int | None = None
    sock_txtime: bool = False
    flow: object = None
    tag: object = field(default=None, compare=False)
