#include "kpath/feature_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "kpath/binary_io.hpp"

namespace fs = std::filesystem;

namespace kpath {

namespace {
constexpr std::string_view kMagic = "KPFT";
}

std::vector<FeatureVector> read_feature_body(const fs::path& path) {
    const auto bytes = read_file_bytes(path.string());
    LeReader r(bytes);
    r.expect_magic(kMagic);
    const auto version_at = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kFeatureFileVersion)
        throw ParseError("unsupported feature file version " + std::to_string(version), version_at);
    const auto count = r.get<std::uint32_t>("count");
    const auto dim = r.get<std::uint32_t>("dim");
    const std::size_t expected = static_cast<std::size_t>(count) * dim * sizeof(float);
    if (r.remaining() != expected)
        throw ParseError("body holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                             std::to_string(expected),
                         r.offset() + std::min(r.remaining(), expected));
    std::vector<FeatureVector> out(count, FeatureVector(dim));
    for (auto& v : out)
        for (double& x : v) x = static_cast<double>(r.get<float>("feature value"));
    return out;
}

fs::path default_labels_path(const fs::path& body) {
    fs::path first = body;
    first += ".labels";
    if (fs::exists(first)) return first;
    fs::path second = body;
    second.replace_extension(".labels");
    if (fs::exists(second)) return second;
    return first;
}

FeatureSet read_feature_set(const fs::path& body, const std::optional<fs::path>& labels) {
    FeatureSet set;
    set.vectors = read_feature_body(body);
    const fs::path label_path = labels.value_or(default_labels_path(body));
    std::ifstream is(label_path);
    if (!is) throw std::runtime_error("cannot open labels file: " + label_path.string());

    std::vector<std::string> raw;
    std::set<std::string> seen;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(is, line)) {
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
            throw ParseError("labels: expected 'id,class_label' in " + label_path.string(), line_offset);
        std::string id = line.substr(0, comma);
        if (!seen.insert(id).second) throw ParseError("labels: duplicate id '" + id + "'", line_offset);
        set.ids.push_back(std::move(id));
        raw.push_back(line.substr(comma + 1));
    }
    if (set.ids.size() != set.vectors.size())
        throw ParseError("labels: " + std::to_string(set.ids.size()) + " lines for " +
                             std::to_string(set.vectors.size()) + " vectors",
                         offset);

    bool numeric = true;
    std::vector<int> parsed(raw.size());
    for (std::size_t i = 0; i < raw.size() && numeric; ++i) {
        const auto res = std::from_chars(raw[i].data(), raw[i].data() + raw[i].size(), parsed[i]);
        numeric = res.ec == std::errc{} && res.ptr == raw[i].data() + raw[i].size() && parsed[i] >= 0;
    }
    if (numeric) {
        set.labels = std::move(parsed);
    } else {
        std::map<std::string, int> index;
        for (const auto& r : raw) index.emplace(r, 0);
        for (auto& [name, i] : index) {
            i = static_cast<int>(set.label_names.size());
            set.label_names.push_back(name);
        }
        for (const auto& r : raw) set.labels.push_back(index.at(r));
    }
    return set;
}

void write_feature_set(const fs::path& path, const FeatureSet& set) {
    if (set.ids.size() != set.vectors.size() || set.labels.size() != set.vectors.size())
        throw std::invalid_argument("write_feature_set: ids, labels and vectors differ in length");
    const std::size_t dim = set.dim();
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write feature file: " + path.string());
        LeWriter w(os);
        w.magic(kMagic);
        w.put(kFeatureFileVersion);
        w.put(static_cast<std::uint32_t>(set.count()));
        w.put(static_cast<std::uint32_t>(dim));
        for (const auto& v : set.vectors) {
            if (v.size() != dim) throw std::invalid_argument("write_feature_set: ragged vectors");
            for (double x : v) w.put(static_cast<float>(x));
        }
        if (!os) throw std::runtime_error("error writing feature file: " + path.string());
    }
    fs::path label_path = path;
    label_path += ".labels";
    std::ofstream ls(label_path);
    if (!ls) throw std::runtime_error("cannot write labels file: " + label_path.string());
    for (std::size_t i = 0; i < set.count(); ++i) {
        if (!set.label_names.empty())
            ls << set.ids[i] << ',' << set.label_names.at(static_cast<std::size_t>(set.labels[i])) << '\n';
        else
            ls << set.ids[i] << ',' << set.labels[i] << '\n';
    }
}

}  // namespace kpath
