// Copyright 2026 The emopack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emopack/feature_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "emopack/error.hpp"

namespace emopack {
namespace {

void
put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void
put_f32(std::string &out, float v)
{
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) noexcept : bytes_{bytes} {}

    std::uint32_t
    u32(const char *what)
    {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= std::uint32_t{static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])} << (8 * i);
        pos_ += 4;
        return v;
    }

    float
    f32(const char *what)
    {
        return std::bit_cast<float>(u32(what));
    }

    std::string_view
    take(std::size_t n, const char *what)
    {
        need(n, what);
        std::string_view s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t
    remaining() const noexcept
    {
        return bytes_.size() - pos_;
    }

private:
    void
    need(std::size_t n, const char *what) const
    {
        if (bytes_.size() - pos_ < n)
            throw DataError{std::string{"truncated feature file while reading "} + what};
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string
encode_feature_file(const FeatureFile &f)
{
    if (f.mel.values.size() != f.mel.n_mels * f.mel.n_frames)
        throw InvariantError{"mel matrix size does not match its shape"};

    std::string out;
    out.reserve(24 + 4 * f.mel.values.size() + 64 * f.members.size());
    out.append(kFeatureMagic.data(), kFeatureMagic.size());
    put_u32(out, kFeatureVersion);
    put_u32(out, static_cast<std::uint32_t>(f.mel.n_mels));
    put_u32(out, static_cast<std::uint32_t>(f.mel.n_frames));
    put_u32(out, static_cast<std::uint32_t>(f.members.size()));
    put_f32(out, f.total_duration_s);
    for (float v : f.mel.values)
        put_f32(out, v);

    for (const MemberRecord &m : f.members) {
        put_u32(out, static_cast<std::uint32_t>(m.id.size()));
        out.append(m.id);
        put_f32(out, m.start_s);
        put_f32(out, m.duration_s);
        for (float e : m.emotion)
            put_f32(out, e);
        put_u32(out, m.domain_id);
    }
    return out;
}

FeatureFile
decode_feature_file(std::string_view bytes)
{
    Reader r{bytes};
    std::string_view magic = r.take(4, "magic");
    if (std::memcmp(magic.data(), kFeatureMagic.data(), 4) != 0)
        throw DataError{"not an EPK1 feature file (bad magic)"};

    const std::uint32_t version = r.u32("version");
    if (version != kFeatureVersion)
        throw DataError{"unsupported feature file version " + std::to_string(version)};

    FeatureFile f;
    f.mel.n_mels = r.u32("n_mels");
    f.mel.n_frames = r.u32("n_frames");
    const std::uint32_t n_members = r.u32("n_members");
    f.total_duration_s = r.f32("total_duration_s");

    const std::size_t cells = f.mel.n_mels * f.mel.n_frames;
    if (r.remaining() / 4 < cells)
        throw DataError{"truncated feature file while reading mel values"};
    f.mel.values.resize(cells);
    for (float &v : f.mel.values)
        v = r.f32("mel values");

    f.members.reserve(n_members);
    for (std::uint32_t i = 0; i < n_members; ++i) {
        MemberRecord m;
        const std::uint32_t len = r.u32("member id length");
        m.id = std::string{r.take(len, "member id")};
        m.start_s = r.f32("member start");
        m.duration_s = r.f32("member duration");
        for (float &e : m.emotion)
            e = r.f32("member emotion");
        m.domain_id = r.u32("member domain");
        f.members.push_back(std::move(m));
    }

    if (r.remaining() != 0)
        throw DataError{"trailing bytes after feature file payload"};
    return f;
}

void
write_feature_file(const std::filesystem::path &path, const FeatureFile &f)
{
    const std::string bytes = encode_feature_file(f);
    std::ofstream out{path, std::ios::binary};
    if (!out)
        throw DataError{"cannot write feature file " + path.string()};
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw DataError{"short write to " + path.string()};
}

FeatureFile
read_feature_file(const std::filesystem::path &path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw DataError{"cannot open feature file " + path.string()};
    std::string bytes{std::istreambuf_iterator<char>{in}, {}};
    try {
        return decode_feature_file(bytes);
    } catch (const DataError &ex) {
        throw DataError{path.string() + ": " + ex.what()};
    }
}

nlohmann::json
sidecar_record(const FeatureFile &f, std::size_t sequence_index, const std::string &relative_path)
{
    nlohmann::json members = nlohmann::json::array();
    for (const MemberRecord &m : f.members) {
        nlohmann::json emotion = nlohmann::json::object();
        for (std::size_t i = 0; i < kNumEmotions; ++i)
            emotion[std::string{kEmotionNames[i]}] = m.emotion[i];
        members.push_back({{"id", m.id},
                           {"start_s", m.start_s},
                           {"dur_s", m.duration_s},
                           {"emotion", std::move(emotion)},
                           {"domain_id", m.domain_id}});
    }

    return {{"sequence", sequence_index},
            {"file", relative_path},
            {"n_mels", f.mel.n_mels},
            {"n_frames", f.mel.n_frames},
            {"total_duration_s", f.total_duration_s},
            {"members", std::move(members)}};
}

} // namespace emopack
