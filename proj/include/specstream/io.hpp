#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specstream/types.hpp"

namespace specstream {

struct MalformedRecord : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncatedRecord : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SampleFormat { Csv, Binary };
std::optional<SampleFormat> parse_sample_format(const std::string& name);

// csvLine records: "timestamp_ms,v0,v1,…" with exactly binCount values.
PsdSample decode_csv_line(const std::string& line, BinIndex binCount);
std::string encode_csv_line(const PsdSample& sample);

// binaryF32 records: little-endian u64 timestamp followed by binCount floats.
std::size_t binary_record_size(BinIndex binCount);
PsdSample decode_binary_record(const std::uint8_t* data, std::size_t len,
                               BinIndex binCount);
std::vector<std::uint8_t> encode_binary_record(const PsdSample& sample);

// Pull-based sample stream; next() returns nullopt at end of stream.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::optional<PsdSample> next() = 0;
};

// Replays a recorded stream: one csv line or one packed binary record per
// sample.  Throws MalformedRecord/TruncatedRecord with the record index.
class FileSampleSource : public SampleSource {
public:
    FileSampleSource(const std::string& path, SampleFormat format, BinIndex binCount);
    std::optional<PsdSample> next() override;

private:
    std::ifstream in_;
    SampleFormat format_;
    BinIndex binCount_;
    std::size_t recordIndex_ = 0;
    std::vector<std::uint8_t> buf_;
};

class VectorSampleSource : public SampleSource {
public:
    explicit VectorSampleSource(std::vector<PsdSample> samples)
        : samples_(std::move(samples)) {}
    std::optional<PsdSample> next() override {
        if (pos_ >= samples_.size()) return std::nullopt;
        return samples_[pos_++];
    }
    void rewind() { pos_ = 0; }

private:
    std::vector<PsdSample> samples_;
    std::size_t pos_ = 0;
};

// Accepts a single TCP peer and reads u32-little-endian length-prefixed
// frames, each framing one record in the configured format.  A zero port
// picks a free one (see port()).  The peer closing the connection cleanly
// ends the stream; a partial frame is a TruncatedRecord.
class TcpSampleSource : public SampleSource {
public:
    TcpSampleSource(const std::string& host, std::uint16_t port, SampleFormat format,
                    BinIndex binCount);
    ~TcpSampleSource() override;
    std::optional<PsdSample> next() override;
    std::uint16_t port() const { return port_; }

private:
    int listenFd_ = -1;
    int connFd_ = -1;
    std::uint16_t port_ = 0;
    SampleFormat format_;
    BinIndex binCount_;
    std::size_t recordIndex_ = 0;
};

// Client-side helpers shared by tests and the frame protocol: write/read one
// length-prefixed frame on a connected socket.  read_frame returns nullopt on
// clean EOF before a frame starts.
void write_frame(int fd, const void* payload, std::uint32_t len);
std::optional<std::vector<std::uint8_t>> read_frame(int fd);

// Connects to host:port; returns the socket fd or throws IoError.
int tcp_connect(const std::string& host, std::uint16_t port);

// Writes a recorded stream to a file in the given format.
void write_sample_file(const std::string& path, SampleFormat format,
                       const std::vector<PsdSample>& samples);

// Streaming writer used by `generate` so large streams never sit in memory.
class SampleFileWriter {
public:
    SampleFileWriter(const std::string& path, SampleFormat format);
    void write(const PsdSample& sample);

private:
    std::ofstream out_;
    SampleFormat format_;
};

}  // namespace specstream
