"""Runtime consistency checks for a line; each returns a list of violation messages."""

from __future__ import annotations

from .line import Line


def part_conservation(line: Line) -> list[str]:
    created = line.parts_created
    accounted = line.parts_absorbed + line.parts_scrapped + line.parts_in_flight()
    if created != accounted:
        return [f"parts created {created} != absorbed {line.parts_absorbed} + scrapped "
                f"{line.parts_scrapped} + in flight {line.parts_in_flight()}"]
    return []


def buffer_integrity(line: Line) -> list[str]:
    problems = []
    for buffer in line.buffers.values():
        occupancy = len(buffer.queue)
        if occupancy > buffer.capacity:
            problems.append(f"{buffer.id}: {occupancy} carriers exceed capacity {buffer.capacity}")
        if buffer.n_in - buffer.n_out != occupancy:
            problems.append(f"{buffer.id}: in {buffer.n_in} - out {buffer.n_out} != {occupancy}")
        ready = [r for _, r in buffer.queue]
        # constant traversal time: insertion order and ready order coincide
        if any(a > b for a, b in zip(ready, ready[1:])):
            problems.append(f"{buffer.id}: carriers out of FIFO order")
    return problems


def worker_conservation(line: Line) -> list[str]:
    problems = []
    for pool in line.pools.values():
        located = {sid: 0 for sid in pool.stations}
        for worker in pool.workers:
            if worker.location is not None:
                located[worker.location] += 1
        for sid, station in pool.stations.items():
            if station.n_workers != located[sid]:
                problems.append(f"{sid}: counts {station.n_workers} workers, {located[sid]} present")
            if station.n_workers < 0:
                problems.append(f"{sid}: negative worker count")
        present = sum(s.n_workers for s in pool.stations.values())
        if present + pool.in_transit != len(pool.workers):
            problems.append(f"pool {pool.id}: {present} present + {pool.in_transit} travelling "
                            f"!= {len(pool.workers)}")
    return problems


def check_line(line: Line) -> list[str]:
    return part_conservation(line) + buffer_integrity(line) + worker_conservation(line)
