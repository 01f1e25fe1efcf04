#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "specstream/io.hpp"

using namespace specstream;

namespace {

PsdSample sample_of(TimestampMs ts, std::vector<float> values) {
    PsdSample s;
    s.timestamp = ts;
    s.values = std::move(values);
    return s;
}

std::vector<PsdSample> random_samples(std::mt19937& rng, int count, BinIndex bins) {
    std::uniform_real_distribution<float> level(-120.0f, -20.0f);
    std::vector<PsdSample> out;
    for (int i = 0; i < count; ++i) {
        PsdSample s;
        s.timestamp = i * 100;
        s.values.resize(static_cast<std::size_t>(bins));
        for (auto& v : s.values) v = level(rng);
        out.push_back(std::move(s));
    }
    return out;
}

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("format names parse") {
    CHECK(parse_sample_format("csv") == SampleFormat::Csv);
    CHECK(parse_sample_format("binary") == SampleFormat::Binary);
    CHECK_FALSE(parse_sample_format("proto").has_value());
}

TEST_CASE("csv lines decode what they encode, bit for bit") {
    std::mt19937 rng(31);
    for (const auto& s : random_samples(rng, 50, 16)) {
        const auto back = decode_csv_line(encode_csv_line(s), 16);
        CHECK(back.timestamp == s.timestamp);
        REQUIRE(back.values.size() == s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            CHECK(back.values[i] == s.values[i]);  // shortest-round-trip floats
        }
    }

    const auto s = decode_csv_line("1000,-90.5,-91,-80.25", 3);
    CHECK(s.timestamp == 1000);
    CHECK(s.values == std::vector<float>{-90.5f, -91.0f, -80.25f});
}

TEST_CASE("csv rejections name the offending field") {
    CHECK_THROWS_AS(decode_csv_line("abc,1,2", 2), MalformedRecord);
    CHECK_THROWS_AS(decode_csv_line("12x,1,2", 2), MalformedRecord);
    CHECK_THROWS_AS(decode_csv_line("5,,3", 2), MalformedRecord);
    CHECK_THROWS_AS(decode_csv_line("5,1,oops", 2), MalformedRecord);
    CHECK_THROWS_AS(decode_csv_line("5,1,2,3", 2), MalformedRecord);  // too many
    CHECK_THROWS_AS(decode_csv_line("5,1", 2), MalformedRecord);      // too few
    CHECK_THROWS_WITH_AS(decode_csv_line("5,1", 2), "expected 2 values, got 1",
                         MalformedRecord);
}

TEST_CASE("binary records decode what they encode") {
    std::mt19937 rng(32);
    for (const auto& s : random_samples(rng, 20, 9)) {
        const auto bytes = encode_binary_record(s);
        REQUIRE(bytes.size() == binary_record_size(9));
        const auto back = decode_binary_record(bytes.data(), bytes.size(), 9);
        CHECK(back.timestamp == s.timestamp);
        CHECK(back.values == s.values);
    }

    const auto bytes = encode_binary_record(sample_of(5, {1.0f, 2.0f}));
    CHECK_THROWS_AS(decode_binary_record(bytes.data(), bytes.size() - 1, 2),
                    TruncatedRecord);
    CHECK_THROWS_AS(decode_binary_record(bytes.data(), bytes.size(), 1), MalformedRecord);
}

TEST_CASE("csv files replay with blank lines and CRLF tolerated") {
    TempFile tmp("io_csv_replay.tmp");
    {
        std::ofstream out(tmp.path);
        out << "0,-90,-91\r\n\n100,-89,-92\r\n\n";
    }
    FileSampleSource src(tmp.path, SampleFormat::Csv, 2);
    auto a = src.next();
    REQUIRE(a.has_value());
    CHECK(a->timestamp == 0);
    CHECK(a->values == std::vector<float>{-90.0f, -91.0f});
    auto b = src.next();
    REQUIRE(b.has_value());
    CHECK(b->timestamp == 100);
    CHECK_FALSE(src.next().has_value());
    CHECK_FALSE(src.next().has_value());  // stays ended
}

TEST_CASE("csv replay errors carry the record number") {
    TempFile tmp("io_csv_bad.tmp");
    {
        std::ofstream out(tmp.path);
        out << "0,-90\n\n100,-89\nbogus,-88\n";
    }
    FileSampleSource src(tmp.path, SampleFormat::Csv, 1);
    CHECK(src.next().has_value());
    CHECK(src.next().has_value());
    CHECK_THROWS_WITH_AS(src.next(), doctest::Contains("record 3"), MalformedRecord);
}

TEST_CASE("binary replay detects a file ending mid-record") {
    TempFile tmp("io_bin_trunc.tmp");
    {
        const auto r0 = encode_binary_record(sample_of(0, {-90.0f, -91.0f}));
        const auto r1 = encode_binary_record(sample_of(100, {-89.0f, -92.0f}));
        std::ofstream out(tmp.path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(r0.data()),
                  static_cast<std::streamsize>(r0.size()));
        out.write(reinterpret_cast<const char*>(r1.data()),
                  static_cast<std::streamsize>(r1.size() / 2));
    }
    FileSampleSource src(tmp.path, SampleFormat::Binary, 2);
    CHECK(src.next().has_value());
    CHECK_THROWS_WITH_AS(src.next(), doctest::Contains("record 2"), TruncatedRecord);
}

TEST_CASE("missing input files are reported on open") {
    CHECK_THROWS_AS(FileSampleSource("definitely_missing.bin", SampleFormat::Binary, 4),
                    IoError);
}

TEST_CASE("sample files round trip through writer and source") {
    std::mt19937 rng(33);
    const auto samples = random_samples(rng, 40, 8);
    for (const SampleFormat fmt : {SampleFormat::Csv, SampleFormat::Binary}) {
        TempFile tmp(fmt == SampleFormat::Csv ? "io_rt.csv" : "io_rt.bin");
        write_sample_file(tmp.path, fmt, samples);
        FileSampleSource src(tmp.path, fmt, 8);
        for (const auto& expect : samples) {
            const auto got = src.next();
            REQUIRE(got.has_value());
            CHECK(got->timestamp == expect.timestamp);
            CHECK(got->values == expect.values);
        }
        CHECK_FALSE(src.next().has_value());
    }
}

TEST_CASE("frame protocol round trips and spots truncation") {
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);

    SUBCASE("whole frames") {
        const std::vector<std::uint8_t> payload = {1, 2, 3, 4, 5};
        write_frame(fds[0], payload.data(), static_cast<std::uint32_t>(payload.size()));
        write_frame(fds[0], nullptr, 0);
        ::close(fds[0]);
        CHECK(read_frame(fds[1]) == payload);
        CHECK(read_frame(fds[1]) == std::vector<std::uint8_t>{});
        CHECK_FALSE(read_frame(fds[1]).has_value());  // clean EOF
    }
    SUBCASE("stream ends inside the length prefix") {
        const std::uint8_t half[2] = {9, 9};
        REQUIRE(::write(fds[0], half, sizeof half) == 2);
        ::close(fds[0]);
        CHECK_THROWS_AS(read_frame(fds[1]), TruncatedRecord);
    }
    SUBCASE("stream ends inside the payload") {
        const std::uint32_t len = 100;
        REQUIRE(::write(fds[0], &len, sizeof len) == 4);
        const std::uint8_t some[10] = {};
        REQUIRE(::write(fds[0], some, sizeof some) == 10);
        ::close(fds[0]);
        CHECK_THROWS_AS(read_frame(fds[1]), TruncatedRecord);
    }
    ::close(fds[1]);
}

TEST_CASE("tcp source streams framed records from a live peer") {
    TcpSampleSource src("127.0.0.1", 0, SampleFormat::Binary, 3);
    REQUIRE(src.port() != 0);

    std::mt19937 rng(34);
    const auto samples = random_samples(rng, 3, 3);
    std::thread client([&] {
        const int fd = tcp_connect("127.0.0.1", src.port());
        for (const auto& s : samples) {
            const auto rec = encode_binary_record(s);
            write_frame(fd, rec.data(), static_cast<std::uint32_t>(rec.size()));
        }
        ::close(fd);
    });

    for (const auto& expect : samples) {
        const auto got = src.next();
        REQUIRE(got.has_value());
        CHECK(got->timestamp == expect.timestamp);
        CHECK(got->values == expect.values);
    }
    CHECK_FALSE(src.next().has_value());
    client.join();
}

TEST_CASE("tcp source surfaces malformed payloads with their record number") {
    TcpSampleSource src("127.0.0.1", 0, SampleFormat::Csv, 2);
    std::thread client([&] {
        const int fd = tcp_connect("127.0.0.1", src.port());
        const std::string good = "0,-90,-91";
        write_frame(fd, good.data(), static_cast<std::uint32_t>(good.size()));
        const std::string bad = "garbage";
        write_frame(fd, bad.data(), static_cast<std::uint32_t>(bad.size()));
        ::close(fd);
    });

    CHECK(src.next().has_value());
    CHECK_THROWS_WITH_AS(src.next(), doctest::Contains("record 2"), MalformedRecord);
    client.join();
}
