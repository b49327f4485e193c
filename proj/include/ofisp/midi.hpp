#pragma once

// Standard MIDI File codec, formats 0 and 1. Parsing pairs note-on and
// note-off events per channel and pitch (note-on with velocity 0 counts
// as note-off), derives measure boundaries from time-signature events,
// and ignores tempo: scheduling works in ticks and measures.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ofisp {

struct NoteEvent {
    std::int64_t onset = 0;     // ticks
    std::int64_t duration = 0;  // ticks, > 0
    int pitch = 0;              // 0..127
    int velocity = 0;           // 0..127
    int track = 0;
};

struct TimeSignature {
    std::int64_t tick = 0;
    int numerator = 4;
    int denominator = 4;
};

class MidiError : public std::runtime_error {
public:
    explicit MidiError(const std::string& what) : std::runtime_error(what) {}
};

/// Parsed score: note events per track plus the measure grid derived from
/// the time signatures. measure_boundaries holds each measure's start tick
/// and a final end tick, strictly increasing over the whole note span.
struct Score {
    int ticks_per_quarter = 480;
    std::vector<TimeSignature> time_signatures;
    std::vector<std::vector<NoteEvent>> tracks;
    std::vector<std::int64_t> measure_boundaries;
    std::vector<std::string> warnings;

    int measure_count() const {
        return static_cast<int>(measure_boundaries.size()) - 1;
    }

    int measure_of(std::int64_t tick) const {
        if (measure_boundaries.size() < 2 || tick < measure_boundaries.front())
            throw std::out_of_range("tick outside the measure grid");
        auto it = std::upper_bound(measure_boundaries.begin(), measure_boundaries.end(), tick);
        int m = static_cast<int>(it - measure_boundaries.begin()) - 1;
        if (m >= measure_count()) throw std::out_of_range("tick outside the measure grid");
        return m;
    }

    std::int64_t end_tick() const {
        std::int64_t end = 0;
        for (const auto& track : tracks)
            for (const auto& n : track) end = std::max(end, n.onset + n.duration);
        return end;
    }
};

namespace midi_detail {

struct Cursor {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    bool at_end() const { return pos >= size; }

    std::uint8_t u8() {
        if (pos + 1 > size) throw MidiError("truncated track chunk");
        return data[pos++];
    }

    std::uint32_t u16() {
        std::uint32_t hi = u8();
        return (hi << 8) | u8();
    }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }

    std::uint32_t varint() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t byte = u8();
            v = (v << 7) | (byte & 0x7f);
            if (!(byte & 0x80)) return v;
        }
        throw MidiError("variable-length quantity too long");
    }

    void skip(std::size_t n) {
        if (pos + n > size) throw MidiError("truncated track chunk");
        pos += n;
    }
};

inline void append_varint(std::vector<std::uint8_t>& out, std::uint32_t v) {
    std::uint8_t stack[4];
    int n = 0;
    stack[n++] = v & 0x7f;
    while (v >>= 7) stack[n++] = (v & 0x7f) | 0x80;
    while (n--) out.push_back(stack[n]);
}

inline void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

inline int log2_int(int v) {
    int p = 0;
    while ((1 << (p + 1)) <= v) ++p;
    return p;
}

}  // namespace midi_detail

/// Builds the measure grid for a tick span from a (sorted, tick-deduped)
/// time signature list. A signature change mid-measure starts a new
/// measure at the change tick.
inline std::vector<std::int64_t> measure_grid(const std::vector<TimeSignature>& sigs,
                                              int ticks_per_quarter,
                                              std::int64_t end_tick) {
    if (sigs.empty() || sigs.front().tick != 0)
        throw MidiError("time signature list must start at tick 0");
    std::vector<std::int64_t> bounds;
    std::int64_t t = 0;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const TimeSignature& sig = sigs[i];
        const std::int64_t len =
            static_cast<std::int64_t>(sig.numerator) * 4 * ticks_per_quarter / sig.denominator;
        if (len < 1) throw MidiError("time signature yields an empty measure");
        const std::int64_t seg_end =
            i + 1 < sigs.size() ? sigs[i + 1].tick : std::max(end_tick, sig.tick + len);
        t = sig.tick;
        while (t < seg_end) {
            bounds.push_back(t);
            t += len;  // a change mid-measure truncates it at the change tick
        }
    }
    bounds.push_back(t);
    return bounds;
}

/// Parses a format 0 or 1 Standard MIDI File. Unmatched or zero-length
/// notes are dropped with a warning rather than failing the parse.
inline Score parse_midi(const std::vector<std::uint8_t>& bytes) {
    midi_detail::Cursor in{bytes.data(), bytes.size()};

    if (bytes.size() < 14 || bytes[0] != 'M' || bytes[1] != 'T' || bytes[2] != 'h' ||
        bytes[3] != 'd')
        throw MidiError("malformed header: missing MThd chunk");
    in.pos = 4;
    const std::uint32_t header_len = in.u32();
    if (header_len < 6) throw MidiError("malformed header: bad length");
    const std::uint32_t format = in.u16();
    const std::uint32_t n_tracks = in.u16();
    const std::uint32_t division = in.u16();
    in.skip(header_len - 6);
    if (format > 1) throw MidiError("unsupported format " + std::to_string(format));
    if (division & 0x8000) throw MidiError("SMPTE time division unsupported");
    if (division == 0) throw MidiError("malformed header: zero time division");

    Score score;
    score.ticks_per_quarter = static_cast<int>(division);
    score.tracks.assign(n_tracks, {});

    std::map<std::int64_t, TimeSignature> sigs_by_tick;

    for (std::uint32_t track = 0; track < n_tracks; ++track) {
        if (in.pos + 8 > in.size) throw MidiError("truncated track chunk");
        if (!(bytes[in.pos] == 'M' && bytes[in.pos + 1] == 'T' && bytes[in.pos + 2] == 'r' &&
              bytes[in.pos + 3] == 'k'))
            throw MidiError("malformed track chunk header");
        in.pos += 4;
        const std::uint32_t chunk_len = in.u32();
        if (in.pos + chunk_len > in.size) throw MidiError("truncated track chunk");
        midi_detail::Cursor tr{bytes.data() + in.pos, chunk_len};
        in.pos += chunk_len;

        std::int64_t tick = 0;
        std::uint8_t running_status = 0;
        // open notes per (channel, pitch); FIFO matching
        std::map<std::pair<int, int>, std::deque<std::pair<std::int64_t, int>>> open;

        auto close_note = [&](int channel, int pitch) {
            auto it = open.find({channel, pitch});
            if (it == open.end() || it->second.empty()) {
                score.warnings.push_back("track " + std::to_string(track) +
                                         ": unmatched note-off for pitch " +
                                         std::to_string(pitch));
                return;
            }
            auto [onset, velocity] = it->second.front();
            it->second.pop_front();
            if (tick <= onset) {
                score.warnings.push_back("track " + std::to_string(track) +
                                         ": dropped zero-length note at tick " +
                                         std::to_string(onset));
                return;
            }
            score.tracks[track].push_back(
                NoteEvent{onset, tick - onset, pitch, velocity, static_cast<int>(track)});
        };

        while (!tr.at_end()) {
            tick += tr.varint();
            std::uint8_t status = tr.u8();
            if (status < 0x80) {  // running status: byte already is data
                if (running_status < 0x80) throw MidiError("data byte without status");
                --tr.pos;
                status = running_status;
            }

            if (status == 0xff) {  // meta event; cancels running status
                running_status = 0;
                const std::uint8_t type = tr.u8();
                const std::uint32_t len = tr.varint();
                if (type == 0x58 && len >= 2) {
                    const int numerator = tr.u8();
                    const int dd = tr.u8();
                    tr.skip(len - 2);
                    sigs_by_tick.insert({tick, TimeSignature{tick, numerator, 1 << dd}});
                } else {
                    tr.skip(len);
                    if (type == 0x2f) break;  // end of track
                }
                continue;
            }
            if (status == 0xf0 || status == 0xf7) {  // sysex
                running_status = 0;
                tr.skip(tr.varint());
                continue;
            }
            if (status >= 0xf0) {  // other system messages carry 0-2 data bytes
                if (status == 0xf1 || status == 0xf3) tr.skip(1);
                if (status == 0xf2) tr.skip(2);
                continue;
            }

            running_status = status;
            const int kind = status & 0xf0;
            const int channel = status & 0x0f;
            const std::uint8_t d1 = tr.u8();
            if (kind == 0xc0 || kind == 0xd0) continue;  // one data byte
            const std::uint8_t d2 = tr.u8();

            if (kind == 0x90 && d2 > 0) {
                open[{channel, d1}].push_back({tick, d2});
            } else if (kind == 0x80 || (kind == 0x90 && d2 == 0)) {
                close_note(channel, d1);
            }
        }

        for (const auto& [key, pending] : open)
            for (std::size_t i = 0; i < pending.size(); ++i)
                score.warnings.push_back("track " + std::to_string(track) +
                                         ": unmatched note-on for pitch " +
                                         std::to_string(key.second) + " dropped");
        std::sort(score.tracks[track].begin(), score.tracks[track].end(),
                  [](const NoteEvent& a, const NoteEvent& b) {
                      if (a.onset != b.onset) return a.onset < b.onset;
                      return a.pitch > b.pitch;
                  });
    }

    for (const auto& [tick, sig] : sigs_by_tick) score.time_signatures.push_back(sig);
    if (score.time_signatures.empty() || score.time_signatures.front().tick > 0)
        score.time_signatures.insert(score.time_signatures.begin(), TimeSignature{0, 4, 4});

    score.measure_boundaries =
        measure_grid(score.time_signatures, score.ticks_per_quarter, score.end_tick());
    return score;
}

inline Score parse_midi_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MidiError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_midi(bytes);
}

/// Writes a format 1 file: a conductor track carrying the time signatures,
/// then one track per note list. Note tracks use channel = index mod 16.
/// Notes of equal pitch must not overlap within a track; such states are
/// ambiguous in the on/off event stream and will not round-trip.
inline std::vector<std::uint8_t> write_midi(int ticks_per_quarter,
                                            const std::vector<TimeSignature>& sigs,
                                            const std::vector<std::vector<NoteEvent>>& tracks) {
    using midi_detail::append_u32;
    using midi_detail::append_varint;

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'M', 'T', 'h', 'd'});
    append_u32(out, 6);
    out.push_back(0);
    out.push_back(1);  // format 1
    const std::uint32_t n_chunks = static_cast<std::uint32_t>(tracks.size()) + 1;
    out.push_back((n_chunks >> 8) & 0xff);
    out.push_back(n_chunks & 0xff);
    out.push_back((ticks_per_quarter >> 8) & 0xff);
    out.push_back(ticks_per_quarter & 0xff);

    auto emit_track = [&out](const std::vector<std::uint8_t>& body) {
        out.insert(out.end(), {'M', 'T', 'r', 'k'});
        append_u32(out, static_cast<std::uint32_t>(body.size() + 4));
        out.insert(out.end(), body.begin(), body.end());
        out.insert(out.end(), {0x00, 0xff, 0x2f, 0x00});  // end of track
    };

    {
        std::vector<std::uint8_t> body;
        std::int64_t at = 0;
        auto ordered = sigs.empty() ? std::vector<TimeSignature>{{0, 4, 4}} : sigs;
        std::sort(ordered.begin(), ordered.end(),
                  [](const TimeSignature& a, const TimeSignature& b) { return a.tick < b.tick; });
        for (const TimeSignature& sig : ordered) {
            append_varint(body, static_cast<std::uint32_t>(sig.tick - at));
            at = sig.tick;
            body.insert(body.end(), {0xff, 0x58, 0x04});
            body.push_back(static_cast<std::uint8_t>(sig.numerator));
            body.push_back(static_cast<std::uint8_t>(midi_detail::log2_int(sig.denominator)));
            body.insert(body.end(), {24, 8});
        }
        emit_track(body);
    }

    for (std::size_t t = 0; t < tracks.size(); ++t) {
        struct Event {
            std::int64_t tick;
            int kind;  // 0 = off, 1 = on; offs sort first at equal ticks
            int pitch;
            int velocity;
        };
        std::vector<Event> events;
        events.reserve(tracks[t].size() * 2);
        for (const NoteEvent& n : tracks[t]) {
            events.push_back({n.onset, 1, n.pitch, n.velocity});
            events.push_back({n.onset + n.duration, 0, n.pitch, 0});
        }
        std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            if (a.tick != b.tick) return a.tick < b.tick;
            if (a.kind != b.kind) return a.kind < b.kind;
            return a.pitch < b.pitch;
        });

        const std::uint8_t channel = static_cast<std::uint8_t>(t % 16);
        std::vector<std::uint8_t> body;
        std::int64_t at = 0;
        for (const Event& e : events) {
            append_varint(body, static_cast<std::uint32_t>(e.tick - at));
            at = e.tick;
            body.push_back(static_cast<std::uint8_t>((e.kind ? 0x90 : 0x80) | channel));
            body.push_back(static_cast<std::uint8_t>(e.pitch));
            body.push_back(static_cast<std::uint8_t>(e.kind ? e.velocity : 0x40));
        }
        emit_track(body);
    }
    return out;
}

inline void write_midi_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MidiError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace ofisp
