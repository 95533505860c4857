#ifndef UBRSIM_TRACE_H
#define UBRSIM_TRACE_H

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ubrsim/sim_error.h"
#include "ubrsim/sim_time.h"

namespace ubrsim {

// Sender congestion-control transition tags.
enum class CwndTag : std::uint8_t {
    kInit = 0,
    kSlowStart = 1,
    kCongAvoid = 2,
    kDupInflate = 3,
    kFastRetransmit = 4,
    kPartialAck = 5,
    kRecoveryExit = 6,
    kTimeout = 7,
};

enum class QueueEvent : std::uint8_t {
    kAccept = 0,
    kDrop = 1,
    kDepart = 2,
};

enum class DropReason : std::uint8_t {
    kTail = 0,
    kEpdThreshold = 1,
    kLoadRatio = 2,
    kFbaThreshold = 3,
};

const char* cwnd_tag_name(CwndTag tag);
const char* drop_reason_name(DropReason reason);

struct CwndRecord {
    SimTime time_ns;
    std::uint16_t vc;
    std::uint32_t cwnd;
    std::uint32_t ssthresh;
    CwndTag tag;
};

struct QueueRecord {
    SimTime time_ns;
    std::uint32_t occupancy;
    QueueEvent event;
};

struct DropRecord {
    SimTime time_ns;
    std::uint16_t vc;
    std::uint32_t frame;
    DropReason reason;
};

// One frame-start admission decision with the accounting state it was made
// from, sufficient to re-evaluate the drop inequality offline.
struct AdmissionRecord {
    SimTime time_ns;
    std::uint16_t vc;
    std::uint32_t frame;
    std::uint32_t x;        // buffer occupancy before the decision
    std::uint32_t y_vc;     // this VC's occupancy before the decision
    std::uint32_t active;   // active VC count before the decision
    std::uint8_t accepted;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_cwnd(const CwndRecord&) {}
    virtual void on_queue(const QueueRecord&) {}
    virtual void on_drop(const DropRecord&) {}
    virtual void on_admission(const AdmissionRecord&) {}
    virtual void flush() {}
};

// Shared no-op sink for runs that do not trace.
TraceSink& null_trace_sink();

// Accumulates records in memory; used by the test suites.
class CaptureTraceSink : public TraceSink {
public:
    void on_cwnd(const CwndRecord& r) override { cwnd.push_back(r); }
    void on_queue(const QueueRecord& r) override { queue.push_back(r); }
    void on_drop(const DropRecord& r) override { drops.push_back(r); }
    void on_admission(const AdmissionRecord& r) override { admissions.push_back(r); }

    std::vector<CwndRecord> cwnd;
    std::vector<QueueRecord> queue;
    std::vector<DropRecord> drops;
    std::vector<AdmissionRecord> admissions;
};

// Binary trace stream format: an 12-byte header (magic "UBRT", u16 version,
// u16 schema id, u32 record size) followed by fixed-width little-endian
// records. Compact on purpose: long runs produce tens of millions of records.
enum class TraceSchema : std::uint16_t {
    kCwnd = 1,
    kQueue = 2,
    kDrop = 3,
    kAdmission = 4,
};

constexpr std::uint16_t kTraceVersion = 1;

std::uint32_t trace_record_size(TraceSchema schema);

class BinaryTraceWriter {
public:
    BinaryTraceWriter() = default;
    BinaryTraceWriter(const std::string& path, TraceSchema schema);
    ~BinaryTraceWriter();

    void open(const std::string& path, TraceSchema schema);
    bool is_open() const { return out_.is_open(); }
    void flush();

    void write(const CwndRecord& r);
    void write(const QueueRecord& r);
    void write(const DropRecord& r);
    void write(const AdmissionRecord& r);

private:
    void put_bytes(const std::uint8_t* data, std::size_t n);

    std::ofstream out_;
    TraceSchema schema_ = TraceSchema::kCwnd;
    std::vector<std::uint8_t> buf_;
};

// Writes each stream to `<dir>/<prefix>cwnd.trace` etc. Streams are created
// lazily on first record so unused files are not produced.
class BinaryTraceSink : public TraceSink {
public:
    BinaryTraceSink(std::string dir, std::string prefix, bool with_admission);

    void on_cwnd(const CwndRecord& r) override;
    void on_queue(const QueueRecord& r) override;
    void on_drop(const DropRecord& r) override;
    void on_admission(const AdmissionRecord& r) override;
    void flush() override;

private:
    std::string dir_;
    std::string prefix_;
    bool with_admission_;
    BinaryTraceWriter cwnd_, queue_, drops_, admissions_;
};

// Streaming reader used by trace-dump and the tests.
class BinaryTraceReader {
public:
    explicit BinaryTraceReader(const std::string& path);

    TraceSchema schema() const { return schema_; }

    bool next_cwnd(CwndRecord& r);
    bool next_queue(QueueRecord& r);
    bool next_drop(DropRecord& r);
    bool next_admission(AdmissionRecord& r);

private:
    bool fill(std::size_t n);

    std::ifstream in_;
    TraceSchema schema_;
    std::vector<std::uint8_t> buf_;
};

} // namespace ubrsim

#endif
