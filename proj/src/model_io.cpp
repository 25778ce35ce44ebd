#include "cfx/model_io.hpp"

#include <bit>
#include <cstring>

#include "cfx/dataset_io.hpp"
#include "cfx/errors.hpp"

namespace cfx {

namespace {

constexpr std::string_view kMagic = "CFXMODEL";

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

class Writer {
public:
    void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void f64s(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    void bytes(void* p, std::size_t n) {
        if (pos_ + n > in_.size()) throw FormatError("model file truncated");
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    std::string str() {
        const auto n = count(1);
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    std::vector<double> f64s() {
        std::vector<double> v(count(8));
        for (double& d : v) d = f64();
        return v;
    }
    // Length prefix, sanity-checked against the remaining bytes.
    std::size_t count(std::size_t element_size) {
        const auto n = u64();
        if (n > (in_.size() - pos_) / element_size) throw FormatError("model file has a corrupt length field");
        return static_cast<std::size_t>(n);
    }
    bool done() const { return pos_ == in_.size(); }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

void write_header(Writer& w, ModelKind kind, Shape shape, const std::optional<NormStats>& norm) {
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(kind));
    w.u64(shape.channels);
    w.u64(shape.length);
    w.u8(norm ? 1 : 0);
    if (norm) {
        w.f64s(norm->mean);
        w.f64s(norm->stddev);
    }
}

struct Header {
    ModelKind kind;
    Shape shape;
    std::optional<NormStats> norm;
};

Header read_header(Reader& r) {
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::string_view(magic, sizeof magic) != kMagic) throw FormatError("not a cfx model file");
    const auto version = r.u32();
    if (version != kModelFormatVersion) {
        throw FormatError("model file version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    }
    Header h;
    const auto kind = r.u32();
    if (kind < 1 || kind > 3) throw FormatError("unknown model kind " + std::to_string(kind));
    h.kind = static_cast<ModelKind>(kind);
    h.shape.channels = r.u64();
    h.shape.length = r.u64();
    if (r.u8() != 0) {
        NormStats stats;
        stats.mean = r.f64s();
        stats.stddev = r.f64s();
        if (stats.mean.size() != h.shape.channels || stats.stddev.size() != h.shape.channels) {
            throw FormatError("normalization block does not match the channel count");
        }
        h.norm = std::move(stats);
    }
    return h;
}

void write_spec(Writer& w, const MLPSpec& spec) {
    w.u64(spec.hidden_sizes.size());
    for (auto h : spec.hidden_sizes) w.u64(h);
    w.u8(static_cast<std::uint8_t>(spec.activation));
    w.u64(spec.seed);
    w.f64(spec.learning_rate);
    w.u64(spec.epochs);
    w.u64(spec.batch_size);
    w.f64(spec.momentum);
}

MLPSpec read_spec(Reader& r) {
    MLPSpec spec;
    spec.hidden_sizes.resize(r.count(8));
    for (auto& h : spec.hidden_sizes) h = r.u64();
    const auto act = r.u8();
    if (act > 2) throw FormatError("unknown activation code");
    spec.activation = static_cast<Activation>(act);
    spec.seed = r.u64();
    spec.learning_rate = r.f64();
    spec.epochs = r.u64();
    spec.batch_size = r.u64();
    spec.momentum = r.f64();
    return spec;
}

void write_net(Writer& w, const DenseNet& net) {
    w.u64(net.layers().size());
    for (const auto& layer : net.layers()) {
        w.u64(layer.inputs);
        w.u64(layer.outputs);
        w.u8(static_cast<std::uint8_t>(layer.activation));
        w.f64s(layer.weights);
        w.f64s(layer.bias);
    }
}

DenseNet read_net(Reader& r) {
    std::vector<DenseLayer> layers(r.count(1));
    for (auto& layer : layers) {
        layer.inputs = r.u64();
        layer.outputs = r.u64();
        const auto act = r.u8();
        if (act > 2) throw FormatError("unknown activation code");
        layer.activation = static_cast<Activation>(act);
        layer.weights = r.f64s();
        layer.bias = r.f64s();
    }
    try {
        return DenseNet(std::move(layers));
    } catch (const ShapeError& e) {
        throw FormatError(std::string("corrupt network: ") + e.what());
    }
}

void write_series(Writer& w, const TimeSeries& s) {
    for (double v : s.values()) w.f64(v);
}

}  // namespace

std::string serialize_classifier(const Classifier& model, const std::optional<NormStats>& norm) {
    Writer w;
    if (const auto* knn = dynamic_cast<const KnnClassifier*>(&model)) {
        write_header(w, ModelKind::knn, knn->input_shape(), norm);
        w.u64(knn->k());
        const auto& m = knn->metric();
        w.u8(static_cast<std::uint8_t>(m.metric));
        w.u8(m.dtw_band ? 1 : 0);
        w.u64(m.dtw_band.value_or(0));
        w.f64(m.change_tolerance);
        w.u8(static_cast<std::uint8_t>(m.multivariate_mode));
        w.u8(m.squared_cost ? 1 : 0);
        const auto& train = knn->training_set();
        w.str(train.problem_name());
        w.u64(train.class_names().size());
        for (const auto& name : train.class_names()) w.str(name);
        w.u64(train.size());
        for (const auto& inst : train.instances()) {
            w.u64(inst.label);
            write_series(w, inst.series);
        }
        return w.take();
    }
    if (const auto* mlp = dynamic_cast<const MlpClassifier*>(&model)) {
        write_header(w, ModelKind::mlp, mlp->input_shape(), norm);
        write_spec(w, mlp->spec());
        w.f64(mlp->train_accuracy());
        write_net(w, mlp->network());
        return w.take();
    }
    throw FormatError("only knn and mlp classifiers can be saved");
}

ModelKind peek_model_kind(std::string_view bytes) {
    Reader r(bytes);
    return read_header(r).kind;
}

LoadedClassifier deserialize_classifier(std::string_view bytes) {
    Reader r(bytes);
    Header h = read_header(r);
    LoadedClassifier out;
    out.norm_stats = h.norm;
    if (h.kind == ModelKind::knn) {
        const auto k = r.u64();
        DistanceConfig m;
        const auto metric = r.u8();
        if (metric > 4) throw FormatError("unknown metric code");
        m.metric = static_cast<Metric>(metric);
        const bool has_band = r.u8() != 0;
        const auto band = r.u64();
        if (has_band) m.dtw_band = band;
        m.change_tolerance = r.f64();
        m.multivariate_mode = static_cast<MultivariateMode>(r.u8() != 0 ? 1 : 0);
        m.squared_cost = r.u8() != 0;
        std::string problem = r.str();
        std::vector<std::string> names(r.count(8));
        for (auto& name : names) name = r.str();
        std::vector<LabeledInstance> instances;
        const auto n = r.count(8);
        instances.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto label = r.u64();
            std::vector<double> values(h.shape.size());
            for (double& v : values) v = r.f64();
            instances.push_back({TimeSeries(h.shape.channels, h.shape.length, std::move(values)), label});
        }
        Dataset train(std::move(instances), std::move(names));
        train.set_problem_name(problem);
        out.model = std::make_unique<KnnClassifier>(std::move(train), k, m);
    } else if (h.kind == ModelKind::mlp) {
        MLPSpec spec = read_spec(r);
        const double acc = r.f64();
        DenseNet net = read_net(r);
        out.model = std::make_unique<MlpClassifier>(std::move(net), h.shape, spec, acc);
    } else {
        throw FormatError("model file holds an autoencoder, not a classifier");
    }
    if (!r.done()) throw FormatError("trailing bytes after model payload");
    return out;
}

std::string serialize_autoencoder(const Autoencoder& ae, const std::optional<NormStats>& norm) {
    Writer w;
    write_header(w, ModelKind::autoencoder, ae.shape(), norm);
    write_spec(w, ae.spec());
    w.f64(ae.reconstruction_mse());
    write_net(w, ae.encoder());
    write_net(w, ae.decoder());
    return w.take();
}

Autoencoder deserialize_autoencoder(std::string_view bytes) {
    Reader r(bytes);
    Header h = read_header(r);
    if (h.kind != ModelKind::autoencoder) throw FormatError("model file holds a classifier, not an autoencoder");
    MLPSpec spec = read_spec(r);
    const double mse = r.f64();
    DenseNet enc = read_net(r);
    DenseNet dec = read_net(r);
    if (!r.done()) throw FormatError("trailing bytes after model payload");
    return Autoencoder(std::move(enc), std::move(dec), h.shape, spec, mse);
}

void save_classifier(const std::filesystem::path& path, const Classifier& model, const std::optional<NormStats>& norm) {
    write_text_file(path, serialize_classifier(model, norm));
}

LoadedClassifier load_classifier(const std::filesystem::path& path) {
    return deserialize_classifier(read_text_file(path));
}

void save_autoencoder(const std::filesystem::path& path, const Autoencoder& ae, const std::optional<NormStats>& norm) {
    write_text_file(path, serialize_autoencoder(ae, norm));
}

Autoencoder load_autoencoder(const std::filesystem::path& path) { return deserialize_autoencoder(read_text_file(path)); }

}  // namespace cfx
