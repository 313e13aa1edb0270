"""Flex-grid slot bookkeeping: first-fit allocation with spectrum continuity
along a path and contiguous multi-line block reservation for fixed-FSR
wavelength sources.

Each link carries 400 slots of 12.5 GHz. Occupancy is tracked per slot as
free / used(owner) / reserved(owner); an integer bitmask per link mirrors the
free/occupied view so first-fit reduces to a run-of-zeros search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import SpectrumConflictError

SLOTS_PER_LINK = 400
SLOT_WIDTH_GHZ = 12.5

FREE = "free"
USED = "used"
RESERVED = "reserved"


@dataclass(frozen=True)
class SlotBlock:
    start_slot: int
    width_slots: int

    def __post_init__(self):
        if self.start_slot < 0 or self.width_slots < 1:
            raise ValueError("invalid slot block")

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.width_slots


def _lowest_free_run(occupied_mask: int, width: int, slots: int) -> int | None:
    """Lowest start index of `width` consecutive zero bits, or None."""
    free = ~occupied_mask & ((1 << slots) - 1)
    run = free
    have = 1
    while have < width and run:
        step = min(have, width - have)
        run &= run >> step
        have += step
    if run == 0:
        return None
    return (run & -run).bit_length() - 1


@dataclass
class _Reservation:
    mws_id: object
    link_ids: tuple[int, ...]
    start_slot: int
    n_lines: int
    per_line_width: int
    line_owner: list  # None while reserved, lightpath id once active


class MaskGrid:
    """Occupancy-only view for dry-run placement (no ownership tracking)."""

    def __init__(self, masks: list[int], slots: int):
        self._masks = masks
        self._slots = slots

    def first_fit(self, link_ids: Sequence[int], width_slots: int) -> SlotBlock | None:
        occ = 0
        for lid in link_ids:
            occ |= self._masks[lid]
        start = _lowest_free_run(occ, width_slots, self._slots)
        return None if start is None else SlotBlock(start, width_slots)

    def occupy(self, link_ids: Sequence[int], block: SlotBlock) -> None:
        mask = ((1 << block.width_slots) - 1) << block.start_slot
        for lid in link_ids:
            self._masks[lid] |= mask


class SpectrumGrid:
    def __init__(self, n_links: int, slots_per_link: int = SLOTS_PER_LINK):
        self.n_links = n_links
        self.slots_per_link = slots_per_link
        # slot state: None (free) or (state, owner)
        self._slots: list[list] = [[None] * slots_per_link for _ in range(n_links)]
        self._masks: list[int] = [0] * n_links
        self._reservations: dict = {}

    # -- queries ------------------------------------------------------------

    def slot_state(self, link_id: int, slot: int) -> tuple[str, object]:
        entry = self._slots[link_id][slot]
        return (FREE, None) if entry is None else entry

    def slot_counts(self, link_id: int) -> dict[str, int]:
        counts = {FREE: 0, USED: 0, RESERVED: 0}
        for entry in self._slots[link_id]:
            counts[FREE if entry is None else entry[0]] += 1
        return counts

    def first_fit(self, link_ids: Sequence[int], width_slots: int) -> SlotBlock | None:
        """Lowest-index block of width_slots free on every listed link."""
        if width_slots < 1:
            raise ValueError("width must be >= 1")
        occ = 0
        for lid in link_ids:
            occ |= self._masks[lid]
        start = _lowest_free_run(occ, width_slots, self.slots_per_link)
        return None if start is None else SlotBlock(start, width_slots)

    def clone_masks(self) -> MaskGrid:
        return MaskGrid(list(self._masks), self.slots_per_link)

    # -- mutation -----------------------------------------------------------

    def _check_free(self, link_ids: Sequence[int], block: SlotBlock) -> None:
        if block.end_slot > self.slots_per_link:
            raise SpectrumConflictError(f"block {block} exceeds the grid")
        for lid in link_ids:
            row = self._slots[lid]
            for s in range(block.start_slot, block.end_slot):
                if row[s] is not None:
                    raise SpectrumConflictError(
                        f"slot {s} on link {lid} is {row[s][0]} (owner {row[s][1]})")

    def _paint(self, link_ids: Sequence[int], block: SlotBlock, entry) -> None:
        mask = ((1 << block.width_slots) - 1) << block.start_slot
        for lid in link_ids:
            row = self._slots[lid]
            for s in range(block.start_slot, block.end_slot):
                row[s] = entry
            if entry is None:
                self._masks[lid] &= ~mask
            else:
                self._masks[lid] |= mask

    def allocate(self, link_ids: Sequence[int], block: SlotBlock, owner,
                 state: str = USED) -> None:
        """All-or-nothing transition of a free block to used/reserved."""
        if state not in (USED, RESERVED):
            raise ValueError(f"cannot allocate into state {state!r}")
        self._check_free(link_ids, block)
        self._paint(link_ids, block, (state, owner))

    def release(self, link_ids: Sequence[int], block: SlotBlock) -> None:
        """Return a previously allocated block to free on the listed links."""
        for lid in link_ids:
            row = self._slots[lid]
            for s in range(block.start_slot, block.end_slot):
                if row[s] is None:
                    raise SpectrumConflictError(f"slot {s} on link {lid} already free")
        self._paint(link_ids, block, None)

    def reserve_fixed_fsr(self, link_ids: Sequence[int], mws_id, n_lines: int,
                          per_line_width_slots: int) -> SlotBlock | None:
        """First-fit a contiguous n_lines x per-line-width block, all reserved.

        Lines sit adjacent inside the block (FSR = per-line spacing); their
        positions are fixed at reservation time and individual lines flip to
        used via activate_reserved_line.
        """
        if mws_id in self._reservations:
            raise SpectrumConflictError(f"reservation {mws_id!r} already exists")
        total = n_lines * per_line_width_slots
        block = self.first_fit(link_ids, total)
        if block is None:
            return None
        self._paint(link_ids, block, (RESERVED, mws_id))
        self._reservations[mws_id] = _Reservation(
            mws_id=mws_id, link_ids=tuple(link_ids), start_slot=block.start_slot,
            n_lines=n_lines, per_line_width=per_line_width_slots,
            line_owner=[None] * n_lines)
        return block

    def cancel_reservation(self, mws_id) -> None:
        """Drop a reservation whose lines are all still inactive."""
        res = self._reservations.pop(mws_id)
        if any(owner is not None for owner in res.line_owner):
            self._reservations[mws_id] = res
            raise SpectrumConflictError(f"reservation {mws_id!r} has active lines")
        block = SlotBlock(res.start_slot, res.n_lines * res.per_line_width)
        self._paint(res.link_ids, block, None)

    def line_block(self, mws_id, line_index: int) -> SlotBlock:
        res = self._reservations[mws_id]
        if not 0 <= line_index < res.n_lines:
            raise ValueError(f"line index {line_index} out of range")
        return SlotBlock(res.start_slot + line_index * res.per_line_width,
                         res.per_line_width)

    def activate_reserved_line(self, mws_id, line_index: int, lightpath_id) -> SlotBlock:
        """Transition one reserved line of an MWS block to used."""
        res = self._reservations[mws_id]
        if not 0 <= line_index < res.n_lines:
            raise ValueError(f"line index {line_index} out of range")
        if res.line_owner[line_index] is not None:
            raise SpectrumConflictError(
                f"line {line_index} of {mws_id!r} is already active")
        block = self.line_block(mws_id, line_index)
        self._paint(res.link_ids, block, (USED, lightpath_id))
        res.line_owner[line_index] = lightpath_id
        return block

    # -- integrity ----------------------------------------------------------

    def check_conservation(self) -> None:
        """Per link: used + reserved + free slots account for the whole grid,
        and the fast mask agrees with the per-slot states."""
        for lid in range(self.n_links):
            counts = self.slot_counts(lid)
            total = counts[FREE] + counts[USED] + counts[RESERVED]
            if total != self.slots_per_link:
                raise AssertionError(f"link {lid}: slot states sum to {total}")
            mask = 0
            for s, entry in enumerate(self._slots[lid]):
                if entry is not None:
                    mask |= 1 << s
            if mask != self._masks[lid]:
                raise AssertionError(f"link {lid}: mask out of sync")

    def dump_rows(self, include_free: bool = False) -> Iterator[tuple[int, int, str, object]]:
        """(link_id, slot, state, owner) rows for the occupancy CSV dump."""
        for lid in range(self.n_links):
            for s, entry in enumerate(self._slots[lid]):
                if entry is None:
                    if include_free:
                        yield (lid, s, FREE, "")
                else:
                    yield (lid, s, entry[0], entry[1])
