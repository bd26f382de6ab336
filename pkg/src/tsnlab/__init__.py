"""Discrete-event testbed for cyclic publish/subscribe traffic on gigabit Ethernet.

The package models two hosts exchanging UADP-encoded datagrams once per
application cycle, optionally through a store-and-forward bridge, with the
egress path of every interface shaped by one of five Linux queueing
disciplines (fq_codel, mqprio, cbs, etf, taprio).  Everything is driven by a
seeded event loop, so a run is reproducible down to the byte in its outputs.
"""

__version__ = "0.1.0"
