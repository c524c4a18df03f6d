#include "hapsurf/waveform.hpp"

#include "hapsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace hapsurf::waveform {

bool Waveform::piezo_exclusive() const {
    Eigen::Index cursor = 0;
    for (const RoutingSpan& span : routing) {
        if (span.begin < cursor || span.end < span.begin || span.end > piezo_vp.size())
            return false;
        cursor = span.end;
    }
    // Samples outside every span must be silent.
    Eigen::Index pos = 0;
    for (const RoutingSpan& span : routing) {
        for (Eigen::Index k = pos; k < span.begin; ++k)
            if (piezo_vp[k] != 0.0) return false;
        pos = span.end;
    }
    for (Eigen::Index k = pos; k < piezo_vp.size(); ++k)
        if (piezo_vp[k] != 0.0) return false;
    return true;
}

double trapezoid_envelope(double t_s, double duration_s, double ramp_s) {
    if (t_s <= 0.0 || t_s >= duration_s) return 0.0;
    if (ramp_s <= 0.0) return 1.0;
    return std::min({1.0, t_s / ramp_s, (duration_s - t_s) / ramp_s});
}

Eigen::ArrayXd ramped_tone(double freq_hz, double amplitude, double duration_s, double ramp_s,
                           double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0) || !(duration_s > 0.0))
        throw ConfigError("tone duration and sample rate must be positive");
    if (ramp_s < 0.0 || ramp_s > duration_s / 2.0)
        throw ConfigError("ramp length must lie in [0, duration/2]");
    const Eigen::Index n = static_cast<Eigen::Index>(std::llround(duration_s * sample_rate_hz));
    Eigen::ArrayXd out(n);
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / sample_rate_hz;
        out[k] = amplitude * trapezoid_envelope(t, duration_s, ramp_s) * std::sin(w * k);
    }
    return out;
}

void write_csv(const Waveform& wave, const std::string& path,
               const std::vector<std::string>& comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    for (const std::string& c : comments) out << "# " << c << "\n";
    out << "time_s,piezo_vp,electro_vp\n";
    const Eigen::Index n = wave.sample_count();
    char line[128];
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / wave.sample_rate_hz;
        const double p = k < wave.piezo_vp.size() ? wave.piezo_vp[k] : 0.0;
        const double e = k < wave.electro_vp.size() ? wave.electro_vp[k] : 0.0;
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g\n", t, p, e);
        out << line;
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::int16_t to_pcm16(double value, double full_scale) {
    const double scaled = std::clamp(value / full_scale, -1.0, 1.0) * 32767.0;
    return static_cast<std::int16_t>(std::lround(scaled));
}

} // namespace

void write_wav16(const Waveform& wave, const std::string& path, double full_scale_vp) {
    if (!(full_scale_vp > 0.0)) throw ConfigError("PCM full scale must be positive");
    const Eigen::Index n = wave.sample_count();
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(n) * 2 * 2;

    std::string blob;
    blob.reserve(44 + data_bytes);
    blob += "RIFF";
    put_u32(blob, 36 + data_bytes);
    blob += "WAVEfmt ";
    put_u32(blob, 16);
    put_u16(blob, 1); // PCM
    put_u16(blob, 2); // stereo
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(wave.sample_rate_hz));
    put_u32(blob, rate);
    put_u32(blob, rate * 4);
    put_u16(blob, 4);
    put_u16(blob, 16);
    blob += "data";
    put_u32(blob, data_bytes);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double p = k < wave.piezo_vp.size() ? wave.piezo_vp[k] : 0.0;
        const double e = k < wave.electro_vp.size() ? wave.electro_vp[k] : 0.0;
        put_u16(blob, static_cast<std::uint16_t>(to_pcm16(p, full_scale_vp)));
        put_u16(blob, static_cast<std::uint16_t>(to_pcm16(e, full_scale_vp)));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw ParseError("write to '" + path + "' failed");
}

} // namespace hapsurf::waveform
