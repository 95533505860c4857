#include "ubrsim/trace.h"

#include <cstring>

namespace ubrsim {
namespace {

constexpr char kMagic[4] = {'U', 'B', 'R', 'T'};
constexpr std::size_t kWriteBuf = 1 << 16;

void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; i++)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; i++)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; i++)
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; i++)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

const char* cwnd_tag_name(CwndTag tag) {
    switch (tag) {
    case CwndTag::kInit: return "init";
    case CwndTag::kSlowStart: return "slow_start";
    case CwndTag::kCongAvoid: return "cong_avoid";
    case CwndTag::kDupInflate: return "dup_inflate";
    case CwndTag::kFastRetransmit: return "fast_rtx";
    case CwndTag::kPartialAck: return "partial_ack";
    case CwndTag::kRecoveryExit: return "recovery_exit";
    case CwndTag::kTimeout: return "timeout";
    }
    return "?";
}

const char* drop_reason_name(DropReason reason) {
    switch (reason) {
    case DropReason::kTail: return "tail";
    case DropReason::kEpdThreshold: return "epd_threshold";
    case DropReason::kLoadRatio: return "load_ratio";
    case DropReason::kFbaThreshold: return "fba_threshold";
    }
    return "?";
}

TraceSink& null_trace_sink() {
    static TraceSink sink;
    return sink;
}

std::uint32_t trace_record_size(TraceSchema schema) {
    switch (schema) {
    case TraceSchema::kCwnd: return 8 + 2 + 4 + 4 + 1;
    case TraceSchema::kQueue: return 8 + 4 + 1;
    case TraceSchema::kDrop: return 8 + 2 + 4 + 1;
    case TraceSchema::kAdmission: return 8 + 2 + 4 + 4 + 4 + 4 + 1;
    }
    throw SimError("trace_schema", "unknown schema id");
}

BinaryTraceWriter::BinaryTraceWriter(const std::string& path, TraceSchema schema) {
    open(path, schema);
}

BinaryTraceWriter::~BinaryTraceWriter() {
    if (out_.is_open())
        flush();
}

void BinaryTraceWriter::open(const std::string& path, TraceSchema schema) {
    schema_ = schema;
    buf_.reserve(kWriteBuf);
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw SimError("trace_open", "cannot open " + path);
    std::uint8_t header[12];
    std::memcpy(header, kMagic, 4);
    put_u16(header + 4, kTraceVersion);
    put_u16(header + 6, static_cast<std::uint16_t>(schema));
    put_u32(header + 8, trace_record_size(schema));
    out_.write(reinterpret_cast<const char*>(header), sizeof header);
}

void BinaryTraceWriter::flush() {
    if (!buf_.empty()) {
        out_.write(reinterpret_cast<const char*>(buf_.data()),
                   static_cast<std::streamsize>(buf_.size()));
        buf_.clear();
    }
    out_.flush();
}

void BinaryTraceWriter::put_bytes(const std::uint8_t* data, std::size_t n) {
    if (buf_.size() + n > kWriteBuf) {
        out_.write(reinterpret_cast<const char*>(buf_.data()),
                   static_cast<std::streamsize>(buf_.size()));
        buf_.clear();
    }
    buf_.insert(buf_.end(), data, data + n);
}

void BinaryTraceWriter::write(const CwndRecord& r) {
    std::uint8_t rec[19];
    put_u64(rec, static_cast<std::uint64_t>(r.time_ns));
    put_u16(rec + 8, r.vc);
    put_u32(rec + 10, r.cwnd);
    put_u32(rec + 14, r.ssthresh);
    rec[18] = static_cast<std::uint8_t>(r.tag);
    put_bytes(rec, sizeof rec);
}

void BinaryTraceWriter::write(const QueueRecord& r) {
    std::uint8_t rec[13];
    put_u64(rec, static_cast<std::uint64_t>(r.time_ns));
    put_u32(rec + 8, r.occupancy);
    rec[12] = static_cast<std::uint8_t>(r.event);
    put_bytes(rec, sizeof rec);
}

void BinaryTraceWriter::write(const DropRecord& r) {
    std::uint8_t rec[15];
    put_u64(rec, static_cast<std::uint64_t>(r.time_ns));
    put_u16(rec + 8, r.vc);
    put_u32(rec + 10, r.frame);
    rec[14] = static_cast<std::uint8_t>(r.reason);
    put_bytes(rec, sizeof rec);
}

void BinaryTraceWriter::write(const AdmissionRecord& r) {
    std::uint8_t rec[27];
    put_u64(rec, static_cast<std::uint64_t>(r.time_ns));
    put_u16(rec + 8, r.vc);
    put_u32(rec + 10, r.frame);
    put_u32(rec + 14, r.x);
    put_u32(rec + 18, r.y_vc);
    put_u32(rec + 22, r.active);
    rec[26] = r.accepted;
    put_bytes(rec, sizeof rec);
}

BinaryTraceSink::BinaryTraceSink(std::string dir, std::string prefix, bool with_admission)
    : dir_(std::move(dir)), prefix_(std::move(prefix)), with_admission_(with_admission) {}

void BinaryTraceSink::on_cwnd(const CwndRecord& r) {
    if (!cwnd_.is_open())
        cwnd_.open(dir_ + "/" + prefix_ + "cwnd.trace", TraceSchema::kCwnd);
    cwnd_.write(r);
}

void BinaryTraceSink::on_queue(const QueueRecord& r) {
    if (!queue_.is_open())
        queue_.open(dir_ + "/" + prefix_ + "queue.trace", TraceSchema::kQueue);
    queue_.write(r);
}

void BinaryTraceSink::on_drop(const DropRecord& r) {
    if (!drops_.is_open())
        drops_.open(dir_ + "/" + prefix_ + "drops.trace", TraceSchema::kDrop);
    drops_.write(r);
}

void BinaryTraceSink::on_admission(const AdmissionRecord& r) {
    if (!with_admission_)
        return;
    if (!admissions_.is_open())
        admissions_.open(dir_ + "/" + prefix_ + "admission.trace", TraceSchema::kAdmission);
    admissions_.write(r);
}

void BinaryTraceSink::flush() {
    if (cwnd_.is_open()) cwnd_.flush();
    if (queue_.is_open()) queue_.flush();
    if (drops_.is_open()) drops_.flush();
    if (admissions_.is_open()) admissions_.flush();
}

BinaryTraceReader::BinaryTraceReader(const std::string& path)
    : in_(path, std::ios::binary), schema_(TraceSchema::kCwnd) {
    if (!in_)
        throw SimError("trace_open", "cannot open " + path);
    std::uint8_t header[12];
    in_.read(reinterpret_cast<char*>(header), sizeof header);
    if (in_.gcount() != sizeof header || std::memcmp(header, kMagic, 4) != 0)
        throw SimError("trace_format", path + " is not a trace file");
    if (get_u16(header + 4) != kTraceVersion)
        throw SimError("trace_format", "unsupported trace version");
    schema_ = static_cast<TraceSchema>(get_u16(header + 6));
    if (get_u32(header + 8) != trace_record_size(schema_))
        throw SimError("trace_format", "record size mismatch");
}

bool BinaryTraceReader::fill(std::size_t n) {
    buf_.resize(n);
    in_.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(n));
    if (in_.gcount() == 0)
        return false;
    if (static_cast<std::size_t>(in_.gcount()) != n)
        throw SimError("trace_format", "truncated record");
    return true;
}

bool BinaryTraceReader::next_cwnd(CwndRecord& r) {
    if (!fill(trace_record_size(TraceSchema::kCwnd)))
        return false;
    r.time_ns = static_cast<SimTime>(get_u64(buf_.data()));
    r.vc = get_u16(buf_.data() + 8);
    r.cwnd = get_u32(buf_.data() + 10);
    r.ssthresh = get_u32(buf_.data() + 14);
    r.tag = static_cast<CwndTag>(buf_[18]);
    return true;
}

bool BinaryTraceReader::next_queue(QueueRecord& r) {
    if (!fill(trace_record_size(TraceSchema::kQueue)))
        return false;
    r.time_ns = static_cast<SimTime>(get_u64(buf_.data()));
    r.occupancy = get_u32(buf_.data() + 8);
    r.event = static_cast<QueueEvent>(buf_[12]);
    return true;
}

bool BinaryTraceReader::next_drop(DropRecord& r) {
    if (!fill(trace_record_size(TraceSchema::kDrop)))
        return false;
    r.time_ns = static_cast<SimTime>(get_u64(buf_.data()));
    r.vc = get_u16(buf_.data() + 8);
    r.frame = get_u32(buf_.data() + 10);
    r.reason = static_cast<DropReason>(buf_[14]);
    return true;
}

bool BinaryTraceReader::next_admission(AdmissionRecord& r) {
    if (!fill(trace_record_size(TraceSchema::kAdmission)))
        return false;
    r.time_ns = static_cast<SimTime>(get_u64(buf_.data()));
    r.vc = get_u16(buf_.data() + 8);
    r.frame = get_u32(buf_.data() + 10);
    r.x = get_u32(buf_.data() + 14);
    r.y_vc = get_u32(buf_.data() + 18);
    r.active = get_u32(buf_.data() + 22);
    r.accepted = buf_[26];
    return true;
}

} // namespace ubrsim
