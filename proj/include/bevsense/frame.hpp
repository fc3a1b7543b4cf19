#pragma once

// Binary acquisition frames: one (frequency, real, imag) measurement per frame.
//
//   offset  size  field
//   0       2     magic A5 5A
//   2       1     version (0x01)
//   3       2     sweep_id, little endian
//   5       1     point_index
//   6       4     frequency, IEEE-754 binary32 LE
//   10      4     real (ohms), binary32 LE
//   14      4     imag (ohms), binary32 LE
//   18      2     CRC-16/CCITT-FALSE over bytes 2..17, LE

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bevsense/error.hpp"
#include "bevsense/spectrum.hpp"

namespace bevsense {

inline constexpr std::size_t kFrameSize = 20;
inline constexpr std::uint8_t kFrameMagic0 = 0xA5;
inline constexpr std::uint8_t kFrameMagic1 = 0x5A;
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kMaxSweepPoints = 256;

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
constexpr std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

struct PointFrame {
    std::uint16_t sweep_id = 0;
    std::uint8_t point_index = 0;
    float frequency = 0.0f;
    float real = 0.0f;
    float imag = 0.0f;

    /// Bitwise equality (distinguishes -0.0 and NaN payloads).
    friend bool operator==(const PointFrame& a, const PointFrame& b) {
        return a.sweep_id == b.sweep_id && a.point_index == b.point_index &&
               std::bit_cast<std::uint32_t>(a.frequency) == std::bit_cast<std::uint32_t>(b.frequency) &&
               std::bit_cast<std::uint32_t>(a.real) == std::bit_cast<std::uint32_t>(b.real) &&
               std::bit_cast<std::uint32_t>(a.imag) == std::bit_cast<std::uint32_t>(b.imag);
    }
};

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

enum class FrameErrorCode { BadMagic, BadVersion, BadLength, BadCrc, BadPayload };

constexpr const char* to_string(FrameErrorCode c) {
    switch (c) {
        case FrameErrorCode::BadMagic: return "BadMagic";
        case FrameErrorCode::BadVersion: return "BadVersion";
        case FrameErrorCode::BadLength: return "BadLength";
        case FrameErrorCode::BadCrc: return "BadCrc";
        case FrameErrorCode::BadPayload: return "BadPayload";
    }
    return "?";
}

class FrameError : public Error {
public:
    FrameError(FrameErrorCode code, const std::string& what)
        : Error(std::string(to_string(code)) + ": " + what), code_(code) {}
    FrameErrorCode code() const noexcept { return code_; }

private:
    FrameErrorCode code_;
};

namespace detail {
inline void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = static_cast<std::uint8_t>(v & 0xFF);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}
inline void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}
}  // namespace detail

inline FrameBytes encode_frame(const PointFrame& f) {
    if (!(f.frequency > 0.0f) || !std::isfinite(f.frequency))
        throw InvalidArgument("frame frequency must be positive and finite");
    FrameBytes b{};
    b[0] = kFrameMagic0;
    b[1] = kFrameMagic1;
    b[2] = kFrameVersion;
    detail::put_u16(&b[3], f.sweep_id);
    b[5] = f.point_index;
    detail::put_u32(&b[6], std::bit_cast<std::uint32_t>(f.frequency));
    detail::put_u32(&b[10], std::bit_cast<std::uint32_t>(f.real));
    detail::put_u32(&b[14], std::bit_cast<std::uint32_t>(f.imag));
    detail::put_u16(&b[18], crc16_ccitt_false(std::span<const std::uint8_t>(b.data() + 2, 16)));
    return b;
}

inline PointFrame decode_frame(std::span<const std::uint8_t> b) {
    if (b.size() != kFrameSize)
        throw FrameError(FrameErrorCode::BadLength,
                         "expected " + std::to_string(kFrameSize) + " bytes, got " + std::to_string(b.size()));
    if (b[0] != kFrameMagic0 || b[1] != kFrameMagic1) throw FrameError(FrameErrorCode::BadMagic, "bad frame magic");
    if (b[2] != kFrameVersion)
        throw FrameError(FrameErrorCode::BadVersion, "unsupported frame version " + std::to_string(b[2]));
    const std::uint16_t want = crc16_ccitt_false(b.subspan(2, 16));
    const std::uint16_t got = detail::get_u16(&b[18]);
    if (want != got) throw FrameError(FrameErrorCode::BadCrc, "checksum mismatch");
    PointFrame f;
    f.sweep_id = detail::get_u16(&b[3]);
    f.point_index = b[5];
    f.frequency = std::bit_cast<float>(detail::get_u32(&b[6]));
    f.real = std::bit_cast<float>(detail::get_u32(&b[10]));
    f.imag = std::bit_cast<float>(detail::get_u32(&b[14]));
    if (!(f.frequency > 0.0f) || !std::isfinite(f.frequency) || !std::isfinite(f.real) || !std::isfinite(f.imag))
        throw FrameError(FrameErrorCode::BadPayload, "frame carries a non-finite value or non-positive frequency");
    return f;
}

/// One frame per grid point, in index order.
inline std::vector<PointFrame> stream_sweep(const Spectrum& s, std::uint16_t sweep_id) {
    if (s.size() > kMaxSweepPoints) throw InvalidArgument("sweeps longer than 256 points cannot be framed");
    std::vector<PointFrame> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out.push_back({sweep_id, static_cast<std::uint8_t>(i), static_cast<float>(s.grid()[i]),
                       static_cast<float>(s.values()[i].real), static_cast<float>(s.values()[i].imag)});
    return out;
}

enum class AssemblyErrorCode { MissingPoints, ConflictingDuplicate, GridMismatch, MixedSweep };

constexpr const char* to_string(AssemblyErrorCode c) {
    switch (c) {
        case AssemblyErrorCode::MissingPoints: return "MissingPoints";
        case AssemblyErrorCode::ConflictingDuplicate: return "ConflictingDuplicate";
        case AssemblyErrorCode::GridMismatch: return "GridMismatch";
        case AssemblyErrorCode::MixedSweep: return "MixedSweep";
    }
    return "?";
}

class AssemblyError : public Error {
public:
    AssemblyError(AssemblyErrorCode code, std::vector<std::size_t> indices, const std::string& what)
        : Error(std::string(to_string(code)) + ": " + what), code_(code), indices_(std::move(indices)) {}
    AssemblyErrorCode code() const noexcept { return code_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    AssemblyErrorCode code_;
    std::vector<std::size_t> indices_;
};

/// Collects frames of one sweep in any order. Identical retransmissions are
/// ignored; a repeated index with a different payload is an error.
class SweepAssembler {
public:
    void feed(const PointFrame& f) {
        if (sweep_id_ && *sweep_id_ != f.sweep_id)
            throw AssemblyError(AssemblyErrorCode::MixedSweep, {f.point_index},
                                "frame from sweep " + std::to_string(f.sweep_id) + " fed to sweep " +
                                    std::to_string(*sweep_id_));
        sweep_id_ = f.sweep_id;
        auto [it, inserted] = frames_.try_emplace(f.point_index, f);
        if (!inserted && !(it->second == f))
            throw AssemblyError(AssemblyErrorCode::ConflictingDuplicate, {f.point_index},
                                "point " + std::to_string(f.point_index) + " received with two different payloads");
    }

    std::optional<std::uint16_t> sweep_id() const { return sweep_id_; }

    std::vector<std::size_t> missing(std::size_t expected_points) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < expected_points; ++i)
            if (!frames_.contains(static_cast<std::uint8_t>(i))) out.push_back(i);
        return out;
    }

    /// Frequencies must match the grid within 0.01 % (binary32 quantization allowance).
    Spectrum finish(const FrequencyGrid& grid, SpectrumMeta meta = {}) const {
        if (grid.size() > kMaxSweepPoints) throw InvalidArgument("grid longer than 256 points");
        std::vector<std::size_t> extra;
        for (const auto& [idx, f] : frames_)
            if (idx >= grid.size()) extra.push_back(idx);
        if (!extra.empty())
            throw AssemblyError(AssemblyErrorCode::GridMismatch, extra, "point index beyond the expected grid");
        if (auto miss = missing(grid.size()); !miss.empty())
            throw AssemblyError(AssemblyErrorCode::MissingPoints, miss,
                                std::to_string(miss.size()) + " point(s) missing");
        std::vector<ComplexImpedance> values;
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const PointFrame& f = frames_.at(static_cast<std::uint8_t>(i));
            if (std::abs(static_cast<double>(f.frequency) - grid[i]) > 1e-4 * grid[i]) bad.push_back(i);
            values.emplace_back(static_cast<double>(f.real), static_cast<double>(f.imag));
        }
        if (!bad.empty())
            throw AssemblyError(AssemblyErrorCode::GridMismatch, bad, "frame frequency differs from the expected grid");
        return Spectrum(grid, std::move(values), std::move(meta));
    }

private:
    std::optional<std::uint16_t> sweep_id_;
    std::map<std::uint8_t, PointFrame> frames_;
};

inline Spectrum assemble_sweep(std::span<const PointFrame> frames, const FrequencyGrid& expected_grid,
                               SpectrumMeta meta = {}) {
    SweepAssembler a;
    for (const auto& f : frames) a.feed(f);
    return a.finish(expected_grid, std::move(meta));
}

/// Concatenated frames; a trailing partial frame is a BadLength error.
inline std::vector<std::uint8_t> encode_stream(std::span<const PointFrame> frames) {
    std::vector<std::uint8_t> out;
    out.reserve(frames.size() * kFrameSize);
    for (const auto& f : frames) {
        const auto b = encode_frame(f);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

inline std::vector<PointFrame> decode_stream(std::span<const std::uint8_t> bytes) {
    std::vector<PointFrame> out;
    std::size_t pos = 0;
    for (; pos + kFrameSize <= bytes.size(); pos += kFrameSize) {
        try {
            out.push_back(decode_frame(bytes.subspan(pos, kFrameSize)));
        } catch (const FrameError& e) {
            throw FrameError(e.code(), "frame " + std::to_string(pos / kFrameSize) + " (byte " + std::to_string(pos) +
                                           "): " + e.what());
        }
    }
    if (pos != bytes.size())
        throw FrameError(FrameErrorCode::BadLength,
                         "stream ends with a partial frame of " + std::to_string(bytes.size() - pos) + " bytes");
    return out;
}

}  // namespace bevsense
