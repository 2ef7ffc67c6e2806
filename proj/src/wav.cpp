#include "ringrc/errors.hpp"
#include "ringrc/speech.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace ringrc {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(b.data(), 2);
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError(fmt::format("cannot parse {} from '{}'", what, text));
    }
}

}  // namespace

WavAudio read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw InputError(path.string() + " is not a RIFF/WAVE file");
    }

    int format = 0, channels = 0, rate = 0, bits = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::size_t size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16 && body + 16 <= bytes.size()) {
            format = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            rate = static_cast<int>(read_u32(chunk + 12));
            bits = read_u16(chunk + 22);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = std::min(size, bytes.size() - body);
        }
        pos = body + size + (size & 1);
    }
    if (format != 1 && format != 0xFFFE) throw InputError(path.string() + ": only PCM WAV is supported");
    if (channels < 1 || rate <= 0) throw InputError(path.string() + ": bad fmt chunk");
    if (bits != 8 && bits != 16) throw InputError(fmt::format("{}: {}-bit PCM not supported", path.string(), bits));
    if (data == nullptr || data_size == 0) throw InputError(path.string() + ": no audio data");

    const std::size_t width = static_cast<std::size_t>(bits / 8);
    const std::size_t frames = data_size / (width * static_cast<std::size_t>(channels));
    if (frames == 0) throw InputError(path.string() + ": no audio data");

    WavAudio audio;
    audio.sample_rate = rate;
    audio.channels = channels;
    audio.mono.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double sum = 0.0;
        for (int c = 0; c < channels; ++c) {
            const unsigned char* p = data + (f * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)) * width;
            sum += bits == 8 ? (static_cast<double>(p[0]) - 128.0) / 128.0
                             : static_cast<double>(static_cast<std::int16_t>(read_u16(p))) / 32768.0;
        }
        audio.mono[f] = sum / channels;
    }
    return audio;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, int sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const auto data_size = static_cast<std::uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    put_u32(out, 36 + data_size);
    out.write("WAVEfmt ", 8);
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(sample_rate));
    put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.write("data", 4);
    put_u32(out, data_size);
    for (double s : samples) {
        const auto q = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 32767.0 / 32768.0) * 32768.0));
        put_u16(out, static_cast<std::uint16_t>(q));
    }
}

std::vector<double> resample_linear(std::span<const double> in, double from_rate, double to_rate) {
    if (in.empty()) return {};
    if (!(from_rate > 0.0) || !(to_rate > 0.0)) throw ConfigError("sample rates must be > 0");
    const auto n_out = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(static_cast<double>(in.size()) * to_rate / from_rate)));
    std::vector<double> out(n_out);
    const double step = from_rate / to_rate;
    for (std::size_t i = 0; i < n_out; ++i) {
        const double t = static_cast<double>(i) * step;
        const auto i0 = static_cast<std::size_t>(t);
        if (i0 + 1 >= in.size()) {
            out[i] = in.back();
        } else {
            const double frac = t - static_cast<double>(i0);
            out[i] = in[i0] + frac * (in[i0 + 1] - in[i0]);
        }
    }
    return out;
}

DigitLabel parse_digit_filename(const std::filesystem::path& path) {
    const std::string stem = path.stem().string();
    const auto first = stem.find('_');
    const auto last = stem.rfind('_');
    if (first == std::string::npos || first == last) {
        throw InputError("filename '" + path.filename().string() + "' does not match <digit>_<speaker>_<utterance>.wav");
    }
    DigitLabel label;
    label.label = parse_int(stem.substr(0, first), "digit");
    label.speaker = stem.substr(first + 1, last - first - 1);
    label.utterance = parse_int(stem.substr(last + 1), "utterance");
    if (label.label < 0 || label.label > 9) throw InputError("digit label out of range in " + stem);
    if (label.speaker.empty()) throw InputError("empty speaker id in " + stem);
    return label;
}

DigitSample ingest_wav(const std::filesystem::path& path, double target_rate,
                       const std::optional<DigitLabel>& label) {
    const DigitLabel meta = label ? *label : parse_digit_filename(path);
    const WavAudio audio = read_wav(path);

    DigitSample sample;
    sample.label = meta.label;
    sample.speaker = meta.speaker;
    sample.utterance = meta.utterance;
    sample.source = path.string();
    sample.samples = audio.sample_rate == static_cast<int>(target_rate)
                         ? audio.mono
                         : resample_linear(audio.mono, audio.sample_rate, target_rate);
    double peak = 0.0;
    for (double s : sample.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.0) {
        for (double& s : sample.samples) s /= peak;
    }
    return sample;
}

Corpus load_wav_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no .wav files in " + dir.string());
    Corpus corpus;
    corpus.reserve(files.size());
    for (const auto& f : files) corpus.push_back(ingest_wav(f));
    return corpus;
}

Corpus load_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw InputError("cannot open manifest " + manifest.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "path,label,speaker,utterance") {
        throw InputError("manifest header must be 'path,label,speaker,utterance'");
    }
    Corpus corpus;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (cells.size() != 4) throw InputError(fmt::format("manifest line {}: expected 4 fields", line_no));
        DigitLabel label{parse_int(cells[1], "label"), cells[2], parse_int(cells[3], "utterance")};
        if (label.label < 0 || label.label > 9) throw InputError(fmt::format("manifest line {}: bad label", line_no));
        std::filesystem::path p = cells[0];
        if (p.is_relative()) p = manifest.parent_path() / p;
        corpus.push_back(ingest_wav(p, kSampleRate, label));
    }
    if (corpus.empty()) throw InputError("manifest lists no files");
    return corpus;
}

}  // namespace ringrc
