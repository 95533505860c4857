#ifndef UBRSIM_ADAPTATION_H
#define UBRSIM_ADAPTATION_H

#include <cstdint>
#include <optional>
#include <vector>

#include "ubrsim/cell.h"
#include "ubrsim/tcp.h"

namespace ubrsim {

// A reassembled AAL5 frame: the enclosed segment plus its framing identity.
struct Frame {
    std::uint16_t vc = 0;
    std::uint32_t frame = 0;
    std::uint32_t cell_count = 0;
    TcpSegment segment;
};

// Splits a segment into its cell sequence. The last cell carries the
// end-of-message flag. `out` is cleared first so callers can reuse a scratch
// vector.
void segment_to_cells(const TcpSegment& seg, std::uint32_t frame_id,
                      std::vector<Cell>& out);

// Per-VC reassembly. Cells of one VC arrive in emission order (the path is
// FIFO); frames with missing cells are discarded, either when their
// end-of-message cell arrives short or when a cell of the next frame shows
// up first.
class Reassembler {
public:
    struct Discard {
        std::uint32_t frame;
        std::uint32_t cells_received;
        std::uint32_t data_len;
    };

    explicit Reassembler(std::uint16_t vc) : vc_(vc) {}

    // Feeds one cell; yields the completed frame when this cell finishes one.
    // Frames discarded as a side effect are appended to `discards` (one cell
    // can kill two: an interrupted predecessor plus a short frame ending on
    // this very cell).
    std::optional<Frame> on_cell(const Cell& cell, std::vector<Discard>& discards);

    bool has_partial() const { return holding_; }
    std::uint32_t partial_frame() const { return frame_; }
    std::uint32_t partial_data_len() const { return data_len_; }
    std::uint32_t partial_cells() const { return received_; }

private:
    std::optional<Discard> abandon();

    std::uint16_t vc_;
    bool holding_ = false;
    bool broken_ = false;        // a gap was observed in this frame
    std::uint32_t frame_ = 0;
    std::uint32_t next_index_ = 0;
    std::uint32_t received_ = 0;
    std::uint32_t seq_ = 0;
    std::uint32_t data_len_ = 0;
};

} // namespace ubrsim

#endif
