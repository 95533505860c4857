#ifndef UBRSIM_CELL_H
#define UBRSIM_CELL_H

#include <cstdint>

namespace ubrsim {

// ATM wire constants. A cell carries 48 payload bytes and occupies 53 bytes
// on the wire. A framed TCP segment adds 20 (TCP) + 20 (IP) + 8 (LLC) + 8
// (AAL5 trailer) bytes before padding to a whole number of cells.
constexpr int kCellPayloadBytes = 48;
constexpr int kCellWireBytes = 53;
constexpr int kFrameOverheadBytes = 56;
constexpr int kCellWireBits = kCellWireBytes * 8;

// One ATM cell of an AAL5 frame. Cells are plain values; the enclosed
// segment is identified by (seq, data_len) so the receiver can rebuild it
// without a side table. `index` runs 0..cell_count-1 and the last cell
// carries the end-of-message flag.
struct Cell {
    std::uint32_t frame = 0;     // per-VC monotone frame id
    std::uint32_t seq = 0;       // first data byte of the enclosed segment
    std::uint32_t data_len = 0;  // segment data bytes (0 for pure ACK frames)
    std::uint16_t vc = 0;
    std::uint8_t index = 0;
    std::uint8_t cell_count = 0;
    std::uint8_t eom = 0;

    bool is_frame_start() const { return index == 0; }
};

// Cells needed to carry a segment with `data_len` payload bytes.
constexpr int cells_for_segment(int data_len) {
    return (data_len + kFrameOverheadBytes + kCellPayloadBytes - 1) / kCellPayloadBytes;
}

} // namespace ubrsim

#endif
