"""UADP network message codec, raw-Ethernet endpoint addressing, frame sizing.

Messages are binary encoded, little-endian throughout.  The layout is fixed
so that a message carrying every optional section and a single writer id has
a 32-byte header in front of the dataset payload:

    offset  size  field
    ------  ----  -----------------------------------------------
    0       1     protocol version (always 1)
    1       1     flags, see FLAG_* bits
    2       8     publisher id
    10      1     dataset class
    11      4     group section: message number u16, sequence u16
    .       1+2k  payload section: writer count u8, k writer ids u16
    .       8     extended section: timestamp, ns
    .       6     reserved, must be zero
    .       9*n   dataset fields, 1 type tag + 8 value bytes each

Group, payload and extended sections appear only when their flag bit is set.
The six reserved bytes are always present.  Dataset fields run to the end of
the buffer, so no field count is stored.
"""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

FLAG_GROUP = 0x01
FLAG_PAYLOAD = 0x02
FLAG_EXTENDED = 0x04
FLAG_SECURITY = 0x08  # reserved: defined so decoders can reject it, never set

ETHERTYPE = 0xB62C

#: Ethernet header (14) + 802.1Q tag (4) + FCS (4).
LINK_OVERHEAD_BYTES = 22
#: Preamble + SFD (8) and interframe gap (12), counted on the wire only.
PHYSICAL_OVERHEAD_BYTES = 20
MAX_LINK_BYTES = 1522

FIELD_BYTES = 9
FULL_HEADER_BYTES = 32
TAG_INT64 = 0x08

_HEAD = struct.Struct("<BBQB")
_GROUP = struct.Struct("<HH")
_U16 = struct.Struct("<H")
_U64 = struct.Struct("<Q")
_FIELD = struct.Struct("<Bq")


class UadpError(ValueError):
    """Base class for encode/decode/addressing failures."""


class OversizeError(UadpError):
    """Encoded frame would exceed the 1522-byte link maximum."""


class DecodeError(UadpError):
    """Buffer does not parse as a supported network message."""


class EndpointError(UadpError):
    """Endpoint URL does not match the opc.eth grammar."""


@dataclass(frozen=True)
class DataSetField:
    """Single published variable: one tag byte plus a 64-bit signed value."""

    value: int
    type_tag: int = TAG_INT64

    def __post_init__(self) -> None:
        if not 0 <= self.type_tag <= 0xFF:
            raise UadpError(f"type tag out of range: {self.type_tag}")
        if not -(2**63) <= self.value < 2**63:
            raise UadpError(f"value does not fit in int64: {self.value}")


@dataclass(frozen=True)
class GroupHeader:
    message_number: int
    sequence_number: int

    def __post_init__(self) -> None:
        for name in ("message_number", "sequence_number"):
            v = getattr(self, name)
            if not 0 <= v <= 0xFFFF:
                raise UadpError(f"{name} out of u16 range: {v}")


@dataclass(frozen=True)
class NetworkMessage:
    """Decoded form of one UADP network message.

    Optional sections are modelled by their natural empty value: ``group``
    None, ``writer_ids`` empty, ``timestamp`` None.  The flag byte is derived
    from those, so an inconsistent flags/content pair cannot be represented.
    """

    publisher_id: int
    dataset_class: int = 0
    group: GroupHeader | None = None
    writer_ids: tuple[int, ...] = ()
    timestamp: int | None = None
    payload: tuple[DataSetField, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.publisher_id < 2**64:
            raise UadpError(f"publisher id out of u64 range: {self.publisher_id}")
        if not 0 <= self.dataset_class <= 0xFF:
            raise UadpError(f"dataset class out of u8 range: {self.dataset_class}")
        for w in self.writer_ids:
            if not 0 <= w <= 0xFFFF:
                raise UadpError(f"writer id out of u16 range: {w}")
        if len(self.writer_ids) > 0xFF:
            raise UadpError("more than 255 writer ids")
        if self.timestamp is not None and not 0 <= self.timestamp < 2**64:
            raise UadpError(f"timestamp out of u64 range: {self.timestamp}")

    @property
    def flags(self) -> int:
        f = 0
        if self.group is not None:
            f |= FLAG_GROUP
        if self.writer_ids:
            f |= FLAG_PAYLOAD
        if self.timestamp is not None:
            f |= FLAG_EXTENDED
        return f

    @property
    def encoded_size(self) -> int:
        n = 11 + 6 + FIELD_BYTES * len(self.payload)
        if self.group is not None:
            n += 4
        if self.writer_ids:
            n += 1 + 2 * len(self.writer_ids)
        if self.timestamp is not None:
            n += 8
        return n


def encode_network_message(msg: NetworkMessage) -> bytes:
    """Serialize ``msg``; refuses anything too large for a single frame."""
    if msg.encoded_size + LINK_OVERHEAD_BYTES > MAX_LINK_BYTES:
        raise OversizeError(
            f"{msg.encoded_size} message bytes exceed the "
            f"{MAX_LINK_BYTES - LINK_OVERHEAD_BYTES} byte payload maximum"
        )
    parts = [_HEAD.pack(PROTOCOL_VERSION, msg.flags, msg.publisher_id, msg.dataset_class)]
    if msg.group is not None:
        parts.append(_GROUP.pack(msg.group.message_number, msg.group.sequence_number))
    if msg.writer_ids:
        parts.append(struct.pack(f"<B{len(msg.writer_ids)}H", len(msg.writer_ids), *msg.writer_ids))
    if msg.timestamp is not None:
        parts.append(_U64.pack(msg.timestamp))
    parts.append(b"\x00" * 6)
    for f in msg.payload:
        parts.append(_FIELD.pack(f.type_tag, f.value))
    return b"".join(parts)


def decode_network_message(data: bytes) -> NetworkMessage:
    """Inverse of :func:`encode_network_message`."""
    if len(data) < 11 + 6:
        raise DecodeError(f"buffer of {len(data)} bytes is shorter than any message")
    version, flags, publisher_id, dataset_class = _HEAD.unpack_from(data, 0)
    if version != PROTOCOL_VERSION:
        raise DecodeError(f"unsupported protocol version {version}")
    if flags & FLAG_SECURITY:
        raise DecodeError("security section flagged but not supported")
    if flags & ~(FLAG_GROUP | FLAG_PAYLOAD | FLAG_EXTENDED):
        raise DecodeError(f"unknown flag bits 0x{flags:02x}")
    pos = 11
    group = None
    if flags & FLAG_GROUP:
        if pos + 4 > len(data):
            raise DecodeError("truncated inside group section")
        mn, sn = _GROUP.unpack_from(data, pos)
        group = GroupHeader(mn, sn)
        pos += 4
    writer_ids: tuple[int, ...] = ()
    if flags & FLAG_PAYLOAD:
        if pos + 1 > len(data):
            raise DecodeError("truncated before writer count")
        count = data[pos]
        pos += 1
        if count == 0:
            raise DecodeError("payload section flagged with zero writers")
        if pos + 2 * count > len(data):
            raise DecodeError("truncated inside writer id list")
        writer_ids = struct.unpack_from(f"<{count}H", data, pos)
        pos += 2 * count
    timestamp = None
    if flags & FLAG_EXTENDED:
        if pos + 8 > len(data):
            raise DecodeError("truncated inside extended section")
        (timestamp,) = _U64.unpack_from(data, pos)
        pos += 8
    if pos + 6 > len(data):
        raise DecodeError("truncated inside reserved block")
    pos += 6
    rest = len(data) - pos
    if rest % FIELD_BYTES:
        raise DecodeError(f"{rest} trailing bytes are not a whole number of fields")
    payload = []
    for _ in range(rest // FIELD_BYTES):
        tag, value = _FIELD.unpack_from(data, pos)
        payload.append(DataSetField(value, tag))
        pos += FIELD_BYTES
    return NetworkMessage(
        publisher_id=publisher_id,
        dataset_class=dataset_class,
        group=group,
        writer_ids=writer_ids,
        timestamp=timestamp,
        payload=tuple(payload),
    )


_ENDPOINT_RE = re.compile(
    r"^opc\.eth://([0-9A-Fa-f]{2}(?:-[0-9A-Fa-f]{2}){5})"
    r"(?::(\d+)(?:\.(\d+))?)?$"
)


@dataclass(frozen=True)
class Endpoint:
    """Destination of a published dataset: MAC plus optional VLAN id and PCP."""

    mac: bytes
    vlan_id: int | None = None
    pcp: int | None = None

    def __post_init__(self) -> None:
        if len(self.mac) != 6:
            raise EndpointError(f"MAC must be 6 bytes, got {len(self.mac)}")
        if self.vlan_id is not None and not 0 <= self.vlan_id <= 4094:
            raise EndpointError(f"VLAN id out of range: {self.vlan_id}")
        if self.pcp is not None:
            if self.vlan_id is None:
                raise EndpointError("PCP given without a VLAN id")
            if not 0 <= self.pcp <= 7:
                raise EndpointError(f"PCP out of range: {self.pcp}")

    @property
    def mac_text(self) -> str:
        return "-".join(f"{b:02X}" for b in self.mac)

    def url(self) -> str:
        u = f"opc.eth://{self.mac_text}"
        if self.vlan_id is not None:
            u += f":{self.vlan_id}"
            if self.pcp is not None:
                u += f".{self.pcp}"
        return u


def parse_endpoint(url: str) -> Endpoint:
    """Parse ``opc.eth://MM-MM-MM-MM-MM-MM[:vlan[.pcp]]``.

    The host part must be a hyphen-separated MAC; colon-separated MACs would
    be ambiguous against the VLAN delimiter and are rejected.
    """
    m = _ENDPOINT_RE.match(url)
    if not m:
        raise EndpointError(
            f"not a valid opc.eth URL (MAC must be hyphen-separated): {url!r}"
        )
    mac = bytes(int(b, 16) for b in m.group(1).split("-"))
    vlan_id = int(m.group(2)) if m.group(2) is not None else None
    pcp = int(m.group(3)) if m.group(3) is not None else None
    # Range errors surface through the Endpoint validator.
    return Endpoint(mac=mac, vlan_id=vlan_id, pcp=pcp)


@dataclass(frozen=True)
class FrameSizes:
    """Sizes of one message at the three accounting levels, in bytes."""

    uadp_bytes: int
    link_bytes: int
    physical_bytes: int

    def __post_init__(self) -> None:
        if self.link_bytes != self.uadp_bytes + LINK_OVERHEAD_BYTES:
            raise UadpError("link size must be uadp + 22")
        if self.physical_bytes != self.link_bytes + PHYSICAL_OVERHEAD_BYTES:
            raise UadpError("physical size must be link + 20")
        if self.link_bytes > MAX_LINK_BYTES:
            raise OversizeError(f"link frame of {self.link_bytes} bytes exceeds {MAX_LINK_BYTES}")


def frame_sizes(n_vars: int) -> FrameSizes:
    """Sizes for the experiment message profile carrying ``n_vars`` int64 vars.

    The profile keeps every optional section present with one writer id, so
    the message is 32 + 9*n bytes.
    """
    if n_vars < 1:
        raise UadpError(f"at least one variable required, got {n_vars}")
    uadp = FULL_HEADER_BYTES + FIELD_BYTES * n_vars
    return FrameSizes(uadp, uadp + LINK_OVERHEAD_BYTES, uadp + LINK_OVERHEAD_BYTES + PHYSICAL_OVERHEAD_BYTES)


def experiment_message(
    n_vars: int,
    value: int,
    sequence: int,
    publisher_id: int = 1,
    writer_id: int = 1,
    timestamp: int = 0,
) -> NetworkMessage:
    """Build the message profile used by the experiment harness.

    All ``n_vars`` fields carry the same counter value; the u16 sequence
    wraps, so the full-width counter in the payload is what identifies a
    cycle end to end.
    """
    seq16 = sequence & 0xFFFF
    return NetworkMessage(
        publisher_id=publisher_id,
        dataset_class=0,
        group=GroupHeader(message_number=seq16, sequence_number=seq16),
        writer_ids=(writer_id,),
        timestamp=timestamp,
        payload=tuple(DataSetField(value) for _ in range(n_vars)),
    )


@dataclass(frozen=True)
class Frame:
    """On-wire Ethernet encapsulation of one encoded message."""

    dst_mac: bytes
    vlan_id: int
    pcp: int
    payload: bytes = field(repr=False)
    ethertype: int = ETHERTYPE

    @property
    def uadp_bytes(self) -> int:
        return len(self.payload)

    @property
    def link_bytes(self) -> int:
        return len(self.payload) + LINK_OVERHEAD_BYTES

    @property
    def physical_bytes(self) -> int:
        return self.link_bytes + PHYSICAL_OVERHEAD_BYTES


def build_frame(msg: NetworkMessage, endpoint: Endpoint) -> Frame:
    """Encapsulate ``msg`` for ``endpoint``.

    Frames always carry an 802.1Q tag; an endpoint without a VLAN id yields a
    priority tag (VID 0, PCP 0) so the size arithmetic stays uniform.
    """
    payload = encode_network_message(msg)
    if len(payload) + LINK_OVERHEAD_BYTES > MAX_LINK_BYTES:
        raise OversizeError("encoded message does not fit in one frame")
    return Frame(
        dst_mac=endpoint.mac,
        vlan_id=endpoint.vlan_id if endpoint.vlan_id is not None else 0,
        pcp=endpoint.pcp if endpoint.pcp is not None else 0,
        payload=payload,
    )
