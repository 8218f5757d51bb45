#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "vsql/data.hpp"
#include "vsql/rng.hpp"

// httplib drags in <resolv.h>, whose _res macro breaks Eigen if seen first.
#include <zlib.h>

#include <httplib.h>

namespace vsql {

namespace {

constexpr const char* kTrainImages = "train-images-idx3-ubyte";
constexpr const char* kTrainLabels = "train-labels-idx1-ubyte";
constexpr const char* kTestImages = "t10k-images-idx3-ubyte";
constexpr const char* kTestLabels = "t10k-labels-idx1-ubyte";

std::uint32_t u32be(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path +
                         "; run `vsql gen mnist` to fetch the files or point "
                         "VSQL_DATA_DIR at a directory holding them");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_split(const MnistSplit& split, const std::string& what) {
    if (split.images.dims.size() != 3 || split.images.dims[1] != 28 ||
        split.images.dims[2] != 28)
        throw ParseError(what + ": image file is not a 28x28 rank-3 tensor");
    if (split.labels.dims.size() != 1)
        throw ParseError(what + ": label file is not rank 1");
    if (split.images.count() != split.labels.count())
        throw ParseError(what + ": image and label counts differ");
    for (std::uint8_t v : split.labels.data)
        if (v > 9) throw ParseError(what + ": label value above 9");
}

std::vector<int> subset_indices(long count, int limit, std::uint64_t seed) {
    std::vector<int> idx(count);
    for (long i = 0; i < count; ++i) idx[i] = static_cast<int>(i);
    if (limit > 0 && limit < count) {
        Rng rng(mix_seed(seed, {0x3A92ull}));
        rng.shuffle(idx);
        idx.resize(limit);
    }
    return idx;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
    z_stream strm{};
    if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK)
        throw ParseError("zlib initialization failed");
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    strm.next_in = const_cast<std::uint8_t*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = buf;
        strm.avail_out = sizeof(buf);
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw ParseError("gzip payload is corrupt");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - strm.avail_out));
    }
    inflateEnd(&strm);
    return out;
}

} // namespace

long IdxData::record_size() const {
    long r = 1;
    for (std::size_t k = 1; k < dims.size(); ++k) r *= dims[k];
    return r;
}

IdxData parse_idx(const std::string& path) {
    std::vector<std::uint8_t> raw = read_file(path);
    if (raw.size() < 4) throw ParseError(path + ": truncated IDX header");
    std::uint32_t magic = u32be(raw.data());
    int rank;
    if (magic == 2051)
        rank = 3;
    else if (magic == 2049)
        rank = 1;
    else
        throw ParseError(path + ": bad IDX magic " + std::to_string(magic));
    if (raw.size() < 4 + 4 * static_cast<std::size_t>(rank))
        throw ParseError(path + ": truncated IDX dimension header");
    IdxData out;
    std::size_t payload = 1;
    for (int k = 0; k < rank; ++k) {
        std::uint32_t d = u32be(raw.data() + 4 + 4 * k);
        out.dims.push_back(static_cast<int>(d));
        payload *= d;
    }
    std::size_t offset = 4 + 4 * static_cast<std::size_t>(rank);
    if (raw.size() != offset + payload)
        throw ParseError(path + ": payload size does not match the header (" +
                         std::to_string(raw.size() - offset) + " bytes, expected " +
                         std::to_string(payload) + ")");
    out.data.assign(raw.begin() + static_cast<long>(offset), raw.end());
    return out;
}

MnistData load_mnist(const std::string& dir) {
    MnistData data;
    data.train.images = parse_idx(dir + "/" + kTrainImages);
    data.train.labels = parse_idx(dir + "/" + kTrainLabels);
    data.test.images = parse_idx(dir + "/" + kTestImages);
    data.test.labels = parse_idx(dir + "/" + kTestLabels);
    check_split(data.train, "train split");
    check_split(data.test, "test split");
    return data;
}

MnistSplit filter_binary_01(const MnistSplit& split) {
    check_split(split, "binary filter input");
    MnistSplit out;
    out.images.dims = {0, 28, 28};
    out.labels.dims = {0};
    long rec = split.images.record_size();
    for (long m = 0; m < split.labels.count(); ++m) {
        if (split.labels.data[m] > 1) continue;
        out.labels.data.push_back(split.labels.data[m]);
        out.images.data.insert(out.images.data.end(), split.images.data.begin() + m * rec,
                               split.images.data.begin() + (m + 1) * rec);
    }
    out.images.dims[0] = static_cast<int>(out.labels.data.size());
    out.labels.dims[0] = out.images.dims[0];
    return out;
}

PureState encode_amplitude(const std::uint8_t* pixels, int n_pixels) {
    if (n_pixels != 784) throw DomainError("amplitude encoding expects 784 pixels");
    CVector a = CVector::Zero(1024);
    double norm2 = 0.0;
    for (int i = 0; i < 784; ++i) {
        double v = static_cast<double>(pixels[i]) / 255.0;
        a[i] = v;
        norm2 += v * v;
    }
    if (norm2 <= 0.0) throw DomainError("all-zero image cannot be amplitude encoded");
    a /= std::sqrt(norm2);
    PureState s;
    s.n_qubits = 10;
    s.amplitudes = std::move(a);
    return s;
}

Dataset mnist_dataset(const MnistData& data, bool binary01, int train_limit,
                      std::uint64_t seed) {
    MnistSplit train = binary01 ? filter_binary_01(data.train) : data.train;
    MnistSplit test = binary01 ? filter_binary_01(data.test) : data.test;
    check_split(train, "train split");
    check_split(test, "test split");

    Dataset out;
    out.n_qubits = 10;
    out.n_classes = binary01 ? 2 : 10;

    long rec = train.images.record_size();
    for (int m : subset_indices(train.labels.count(), train_limit, seed))
        out.train.push_back({encode_amplitude(train.images.data.data() + m * rec, 784),
                             static_cast<int>(train.labels.data[m])});
    for (long m = 0; m < test.labels.count(); ++m)
        out.val.push_back({encode_amplitude(test.images.data.data() + m * rec, 784),
                           static_cast<int>(test.labels.data[m])});
    return out;
}

VectorDataset mnist_vector_dataset(const MnistData& data, int train_limit,
                                   std::uint64_t seed) {
    check_split(data.train, "train split");
    check_split(data.test, "test split");
    long rec = data.train.images.record_size();
    std::vector<int> keep = subset_indices(data.train.labels.count(), train_limit, seed);

    VectorDataset out;
    out.n_classes = 10;
    out.train_x.resize(static_cast<long>(keep.size()), rec);
    out.train_y.resize(keep.size());
    for (std::size_t row = 0; row < keep.size(); ++row) {
        long m = keep[row];
        for (long i = 0; i < rec; ++i)
            out.train_x(static_cast<long>(row), i) =
                static_cast<double>(data.train.images.data[m * rec + i]) / 255.0;
        out.train_y[row] = data.train.labels.data[m];
    }
    out.test_x.resize(data.test.labels.count(), rec);
    out.test_y.resize(data.test.labels.count());
    for (long m = 0; m < data.test.labels.count(); ++m) {
        for (long i = 0; i < rec; ++i)
            out.test_x(m, i) = static_cast<double>(data.test.images.data[m * rec + i]) / 255.0;
        out.test_y[m] = data.test.labels.data[m];
    }
    return out;
}

std::string resolve_data_dir(const std::string& cli_dir, const std::string& config_dir) {
    if (!cli_dir.empty()) return cli_dir;
    if (const char* env = std::getenv("VSQL_DATA_DIR"); env && *env) return env;
    if (!config_dir.empty()) return config_dir;
    return "data/mnist";
}

bool mnist_files_present(const std::string& dir) {
    try {
        load_mnist(dir);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

void fetch_mnist(const std::string& dir) {
    std::filesystem::create_directories(dir);
    const char* names[4] = {kTrainImages, kTrainLabels, kTestImages, kTestLabels};
    for (const char* name : names) {
        std::string path = dir + "/" + name;
        bool ok = false;
        try {
            parse_idx(path);
            ok = true;
        } catch (const ParseError&) {
        }
        if (ok) continue;

        httplib::Client client("ossci-datasets.s3.amazonaws.com", 80);
        client.set_connection_timeout(20);
        client.set_read_timeout(60);
        auto res = client.Get(std::string("/mnist/") + name + ".gz");
        if (!res || res->status != 200)
            throw ConfigError("could not download " + std::string(name) +
                              ".gz; place the canonical IDX files under " + dir +
                              " manually");
        std::vector<std::uint8_t> gz(res->body.begin(), res->body.end());
        std::vector<std::uint8_t> plain = gunzip(gz);
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(plain.data()),
                  static_cast<long>(plain.size()));
        out.close();
        parse_idx(path); // verify what landed on disk
    }
    load_mnist(dir); // cross-file validation
}

} // namespace vsql
