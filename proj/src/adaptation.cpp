#include "ubrsim/adaptation.h"

namespace ubrsim {

void segment_to_cells(const TcpSegment& seg, std::uint32_t frame_id,
                      std::vector<Cell>& out) {
    out.clear();
    int n = cells_for_segment(seg.data_len);
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; i++) {
        Cell c;
        c.vc = static_cast<std::uint16_t>(seg.vc);
        c.frame = frame_id;
        c.index = static_cast<std::uint8_t>(i);
        c.cell_count = static_cast<std::uint8_t>(n);
        c.eom = (i == n - 1) ? 1 : 0;
        c.seq = static_cast<std::uint32_t>(seg.seq);
        c.data_len = static_cast<std::uint32_t>(seg.data_len);
        out.push_back(c);
    }
}

std::optional<Reassembler::Discard> Reassembler::abandon() {
    if (!holding_)
        return std::nullopt;
    Discard d{frame_, received_, data_len_};
    holding_ = false;
    broken_ = false;
    received_ = 0;
    next_index_ = 0;
    return d;
}

std::optional<Frame> Reassembler::on_cell(const Cell& cell,
                                          std::vector<Discard>& discards) {
    if (holding_ && cell.frame != frame_) {
        // A new frame began before the previous one completed: the previous
        // frame lost its tail (including the end-of-message cell).
        if (auto d = abandon())
            discards.push_back(*d);
    }

    if (!holding_) {
        holding_ = true;
        frame_ = cell.frame;
        seq_ = cell.seq;
        data_len_ = cell.data_len;
        next_index_ = 0;
        received_ = 0;
        broken_ = false;
    }

    received_++;
    if (cell.index != next_index_)
        broken_ = true;
    next_index_ = cell.index + 1;

    if (!cell.eom)
        return std::nullopt;

    bool complete = !broken_ && received_ == cell.cell_count &&
                    cell.index == cell.cell_count - 1;
    if (!complete) {
        if (auto d = abandon())
            discards.push_back(*d);
        return std::nullopt;
    }

    Frame f;
    f.vc = vc_;
    f.frame = frame_;
    f.cell_count = cell.cell_count;
    f.segment.vc = vc_;
    f.segment.seq = static_cast<std::int64_t>(seq_);
    f.segment.data_len = static_cast<std::int32_t>(data_len_);
    holding_ = false;
    broken_ = false;
    received_ = 0;
    next_index_ = 0;
    return f;
}

} // namespace ubrsim
