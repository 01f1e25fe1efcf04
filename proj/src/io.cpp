#include "specstream/io.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <charconv>
#include <cstring>

static_assert(std::endian::native == std::endian::little,
              "wire formats are little-endian; this build assumes a LE host");

namespace specstream {

std::optional<SampleFormat> parse_sample_format(const std::string& name) {
    if (name == "csv") return SampleFormat::Csv;
    if (name == "binary") return SampleFormat::Binary;
    return std::nullopt;
}

PsdSample decode_csv_line(const std::string& line, BinIndex binCount) {
    PsdSample s;
    s.values.reserve(static_cast<std::size_t>(binCount));
    const char* p = line.data();
    const char* end = p + line.size();

    auto field_end = [&](const char* from) {
        const char* c = from;
        while (c != end && *c != ',') ++c;
        return c;
    };

    const char* fe = field_end(p);
    auto [tsEnd, tsErr] = std::from_chars(p, fe, s.timestamp);
    if (tsErr != std::errc{} || tsEnd != fe) {
        throw MalformedRecord("bad timestamp field: '" + line.substr(0, fe - p) + "'");
    }
    p = fe;

    while (p != end) {
        ++p;  // skip comma
        fe = field_end(p);
        float v = 0.0f;
        auto [vEnd, vErr] = std::from_chars(p, fe, v);
        if (vErr != std::errc{} || vEnd != fe || fe == p) {
            throw MalformedRecord("bad value field: '" + std::string(p, fe) + "'");
        }
        s.values.push_back(v);
        p = fe;
    }
    if (s.values.size() != static_cast<std::size_t>(binCount)) {
        throw MalformedRecord("expected " + std::to_string(binCount) + " values, got " +
                              std::to_string(s.values.size()));
    }
    return s;
}

std::string encode_csv_line(const PsdSample& sample) {
    std::string out = std::to_string(sample.timestamp);
    char buf[48];
    for (float v : sample.values) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        out += ',';
        out.append(buf, p);
    }
    return out;
}

std::size_t binary_record_size(BinIndex binCount) {
    return sizeof(std::uint64_t) + sizeof(float) * static_cast<std::size_t>(binCount);
}

PsdSample decode_binary_record(const std::uint8_t* data, std::size_t len,
                               BinIndex binCount) {
    const std::size_t need = binary_record_size(binCount);
    if (len < need) {
        throw TruncatedRecord("record is " + std::to_string(len) + " bytes, need " +
                              std::to_string(need));
    }
    if (len > need) {
        throw MalformedRecord("record is " + std::to_string(len) + " bytes, expected " +
                              std::to_string(need));
    }
    PsdSample s;
    std::uint64_t ts = 0;
    std::memcpy(&ts, data, sizeof ts);
    s.timestamp = static_cast<TimestampMs>(ts);
    s.values.resize(static_cast<std::size_t>(binCount));
    std::memcpy(s.values.data(), data + sizeof ts, sizeof(float) * s.values.size());
    return s;
}

std::vector<std::uint8_t> encode_binary_record(const PsdSample& sample) {
    std::vector<std::uint8_t> out(binary_record_size(
        static_cast<BinIndex>(sample.values.size())));
    const auto ts = static_cast<std::uint64_t>(sample.timestamp);
    std::memcpy(out.data(), &ts, sizeof ts);
    std::memcpy(out.data() + sizeof ts, sample.values.data(),
                sizeof(float) * sample.values.size());
    return out;
}

FileSampleSource::FileSampleSource(const std::string& path, SampleFormat format,
                                   BinIndex binCount)
    : in_(path, format == SampleFormat::Binary ? std::ios::binary : std::ios::in),
      format_(format),
      binCount_(binCount) {
    if (!in_) throw IoError("cannot open input file: " + path);
    if (format_ == SampleFormat::Binary) buf_.resize(binary_record_size(binCount));
}

std::optional<PsdSample> FileSampleSource::next() {
    if (format_ == SampleFormat::Csv) {
        std::string line;
        while (std::getline(in_, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            ++recordIndex_;
            try {
                return decode_csv_line(line, binCount_);
            } catch (const MalformedRecord& e) {
                throw MalformedRecord("record " + std::to_string(recordIndex_) + ": " +
                                      e.what());
            }
        }
        return std::nullopt;
    }
    in_.read(reinterpret_cast<char*>(buf_.data()),
             static_cast<std::streamsize>(buf_.size()));
    const auto got = in_.gcount();
    if (got == 0) return std::nullopt;
    ++recordIndex_;
    if (static_cast<std::size_t>(got) != buf_.size()) {
        throw TruncatedRecord("record " + std::to_string(recordIndex_) +
                              ": file ends mid-record");
    }
    return decode_binary_record(buf_.data(), buf_.size(), binCount_);
}

namespace {

void write_all(int fd, const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    while (len > 0) {
        const ssize_t n = ::write(fd, p, len);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(std::string("socket write failed: ") + std::strerror(errno));
        }
        p += n;
        len -= static_cast<std::size_t>(n);
    }
}

// Returns bytes read; short only on EOF.
std::size_t read_full(int fd, void* data, std::size_t len) {
    auto* p = static_cast<std::uint8_t*>(data);
    std::size_t total = 0;
    while (total < len) {
        const ssize_t n = ::read(fd, p + total, len - total);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError(std::string("socket read failed: ") + std::strerror(errno));
        }
        if (n == 0) break;
        total += static_cast<std::size_t>(n);
    }
    return total;
}

}  // namespace

void write_frame(int fd, const void* payload, std::uint32_t len) {
    write_all(fd, &len, sizeof len);
    if (len > 0) write_all(fd, payload, len);
}

std::optional<std::vector<std::uint8_t>> read_frame(int fd) {
    std::uint32_t len = 0;
    const std::size_t got = read_full(fd, &len, sizeof len);
    if (got == 0) return std::nullopt;  // clean EOF between frames
    if (got != sizeof len) throw TruncatedRecord("stream ends mid length prefix");
    std::vector<std::uint8_t> payload(len);
    if (read_full(fd, payload.data(), len) != len) {
        throw TruncatedRecord("stream ends mid frame");
    }
    return payload;
}

int tcp_connect(const std::string& host, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw IoError("bad host address: " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        throw IoError("connect to " + host + ":" + std::to_string(port) + " failed: " +
                      std::strerror(errno));
    }
    return fd;
}

TcpSampleSource::TcpSampleSource(const std::string& host, std::uint16_t port,
                                 SampleFormat format, BinIndex binCount)
    : format_(format), binCount_(binCount) {
    listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listenFd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listenFd_);
        throw IoError("bad listen address: " + host);
    }
    if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listenFd_, 1) != 0) {
        const std::string err = std::strerror(errno);
        ::close(listenFd_);
        throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
    }
    socklen_t alen = sizeof addr;
    ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &alen);
    port_ = ntohs(addr.sin_port);
}

TcpSampleSource::~TcpSampleSource() {
    if (connFd_ >= 0) ::close(connFd_);
    if (listenFd_ >= 0) ::close(listenFd_);
}

std::optional<PsdSample> TcpSampleSource::next() {
    if (connFd_ < 0) {
        connFd_ = ::accept(listenFd_, nullptr, nullptr);
        if (connFd_ < 0) throw IoError(std::string("accept: ") + std::strerror(errno));
        ::close(listenFd_);
        listenFd_ = -1;
    }
    auto frame = read_frame(connFd_);
    if (!frame) return std::nullopt;
    ++recordIndex_;
    try {
        if (format_ == SampleFormat::Csv) {
            return decode_csv_line(
                std::string(reinterpret_cast<const char*>(frame->data()), frame->size()),
                binCount_);
        }
        return decode_binary_record(frame->data(), frame->size(), binCount_);
    } catch (const MalformedRecord& e) {
        throw MalformedRecord("record " + std::to_string(recordIndex_) + ": " + e.what());
    } catch (const TruncatedRecord& e) {
        throw TruncatedRecord("record " + std::to_string(recordIndex_) + ": " + e.what());
    }
}

SampleFileWriter::SampleFileWriter(const std::string& path, SampleFormat format)
    : out_(path, format == SampleFormat::Binary ? std::ios::binary : std::ios::out),
      format_(format) {
    if (!out_) throw IoError("cannot open output file: " + path);
}

void SampleFileWriter::write(const PsdSample& sample) {
    if (format_ == SampleFormat::Csv) {
        out_ << encode_csv_line(sample) << '\n';
    } else {
        const auto rec = encode_binary_record(sample);
        out_.write(reinterpret_cast<const char*>(rec.data()),
                   static_cast<std::streamsize>(rec.size()));
    }
    if (!out_) throw IoError("write failed");
}

void write_sample_file(const std::string& path, SampleFormat format,
                       const std::vector<PsdSample>& samples) {
    SampleFileWriter w(path, format);
    for (const PsdSample& s : samples) w.write(s);
}

}  // namespace specstream
