#include "shred/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "shred/error.hpp"

namespace shred {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

constexpr std::uint32_t kDtypeF64 = 1;
constexpr std::uint64_t kMaxAxis = std::uint64_t{1} << 40;

class Writer {
public:
    explicit Writer(const char* magic) { bytes_.insert(bytes_.end(), magic, magic + 4); }

    template <class T>
    void put(T value)
    {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void u8(std::uint8_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f64(double v) { put(v); }
    void index(Index v) { u64(static_cast<std::uint64_t>(v)); }
    void string(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    void doubles(const double* p, Index n)
    {
        const auto* b = reinterpret_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n * 8);
    }
    void matrix(const Matrix& m)
    {
        index(m.rows());
        index(m.cols());
        doubles(m.data(), m.size());
    }
    void vector(const Vector& v)
    {
        index(v.size());
        doubles(v.data(), v.size());
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes, const char* magic, std::string what)
        : bytes_(bytes), what_(std::move(what))
    {
        require(bytes.size() >= 4 && std::memcmp(bytes.data(), magic, 4) == 0, ErrorKind::Io,
                what_ + ": bad magic bytes (expected \"" + std::string(magic, 4) + "\")");
        at_ = 4;
    }

    template <class T>
    T get()
    {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + at_, sizeof(T));
        at_ += sizeof(T);
        return value;
    }
    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return get<double>(); }
    Index index()
    {
        const std::uint64_t v = u64();
        require(v < kMaxAxis, ErrorKind::Io, what_ + ": implausible size field " + std::to_string(v));
        return static_cast<Index>(v);
    }
    std::string string()
    {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + at_), n);
        at_ += n;
        return s;
    }
    void doubles(double* p, Index n)
    {
        need(static_cast<std::size_t>(n) * 8);
        std::memcpy(p, bytes_.data() + at_, static_cast<std::size_t>(n) * 8);
        at_ += static_cast<std::size_t>(n) * 8;
    }
    Matrix matrix()
    {
        const Index r = index();
        const Index c = index();
        Matrix m(r, c);
        doubles(m.data(), m.size());
        return m;
    }
    Vector vector()
    {
        Vector v(index());
        doubles(v.data(), v.size());
        return v;
    }
    void version(std::uint32_t expected)
    {
        const std::uint32_t v = u32();
        require(v == expected, ErrorKind::Io,
                what_ + ": unsupported format version " + std::to_string(v) + " (this build reads version " +
                    std::to_string(expected) + ")");
    }
    void finish() const
    {
        require(at_ == bytes_.size(), ErrorKind::Io,
                what_ + ": " + std::to_string(bytes_.size() - at_) + " trailing bytes");
    }
    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - at_; }

private:
    void need(std::size_t n) const
    {
        require(bytes_.size() - at_ >= n, ErrorKind::Io, what_ + ": truncated file");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string what_;
    std::size_t at_ = 0;
};

void put_spec(Writer& w, const NetworkSpec& spec)
{
    w.u32(static_cast<std::uint32_t>(spec.cell));
    w.index(spec.input_size);
    w.index(spec.hidden_size);
    w.index(spec.num_layers);
    w.index(static_cast<Index>(spec.decoder_layers.size()));
    for (Index width : spec.decoder_layers) w.index(width);
    w.index(spec.output_size);
}

CellKind get_cell(Reader& r)
{
    const std::uint32_t c = r.u32();
    require(c <= 1, ErrorKind::Io, "checkpoint: unknown cell code " + std::to_string(c));
    return static_cast<CellKind>(c);
}

NetworkSpec get_spec(Reader& r)
{
    NetworkSpec spec;
    spec.cell = get_cell(r);
    spec.input_size = r.index();
    spec.hidden_size = r.index();
    spec.num_layers = r.index();
    spec.decoder_layers.resize(static_cast<std::size_t>(r.index()));
    for (Index& width : spec.decoder_layers) width = r.index();
    spec.output_size = r.index();
    return spec;
}

void put_params(Writer& w, const Network& net)
{
    w.index(static_cast<Index>(net.parameters().size()));
    for (const Matrix& p : net.parameters()) w.matrix(p);
}

void get_params(Reader& r, Network& net, const std::string& what)
{
    auto& params = net.parameters();
    const Index count = r.index();
    require(count == static_cast<Index>(params.size()), ErrorKind::Io,
            what + ": parameter count " + std::to_string(count) + " does not match architecture (" +
                std::to_string(params.size()) + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix m = r.matrix();
        require(m.rows() == params[i].rows() && m.cols() == params[i].cols(), ErrorKind::Io,
                what + ": parameter " + std::to_string(i) + " has the wrong shape");
        params[i] = std::move(m);
    }
}

} // namespace

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), ErrorKind::Io, "read error on '" + path.string() + "'");
    return bytes;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::Io, "write error on '" + path.string() + "'");
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::uint8_t> serialize_dataset(const std::string& id, const FieldArray& array)
{
    Writer w("SHDF");
    w.u32(kDatasetVersion);
    w.string(id);
    w.u32(kDtypeF64);
    w.u32(static_cast<std::uint32_t>(array.rank()));
    for (Index n : array.shape()) w.index(n);
    w.doubles(array.data(), array.size());
    return w.take();
}

DatasetFile deserialize_dataset(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, "SHDF", "dataset file");
    r.version(kDatasetVersion);
    DatasetFile file;
    file.id = r.string();
    const std::uint32_t dtype = r.u32();
    require(dtype == kDtypeF64, ErrorKind::Io, "dataset file: unsupported dtype code " + std::to_string(dtype));
    const std::uint32_t rank = r.u32();
    require(rank <= 16, ErrorKind::Io, "dataset file: implausible axis count " + std::to_string(rank));
    std::vector<Index> shape(rank);
    std::uint64_t count = 1;
    for (Index& n : shape) {
        n = r.index();
        count *= static_cast<std::uint64_t>(n);
    }
    require(r.remaining() == count * 8, ErrorKind::Io,
            "dataset file: payload is " + std::to_string(r.remaining()) + " bytes, axes require " +
                std::to_string(count * 8));
    std::vector<double> values(count);
    r.doubles(values.data(), static_cast<Index>(count));
    file.array = FieldArray(std::move(shape), std::move(values));
    return file;
}

void write_dataset(const std::filesystem::path& path, const std::string& id, const FieldArray& array)
{
    write_bytes(path, serialize_dataset(id, array));
}

DatasetFile read_dataset(const std::filesystem::path& path)
{
    try {
        return deserialize_dataset(read_bytes(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io && std::string(e.what()).rfind("cannot open", 0) != 0)
            fail(ErrorKind::Io, path.string() + ": " + e.what());
        throw;
    }
}

void write_csv(const std::filesystem::path& path, const Matrix& m)
{
    std::string text;
    char buf[32];
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) text += ',';
            text += buf;
        }
        text += '\n';
    }
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> serialize_checkpoint(const ShredModel& model)
{
    Writer w("SHRD");
    w.u32(kCheckpointVersion);
    put_spec(w, model.network().spec());
    put_params(w, model.network());
    w.u32(static_cast<std::uint32_t>(model.forecaster_kind()));
    if (const auto* s = std::get_if<SindyForecasterSpec>(&model.forecaster_config())) {
        w.index(model.latent_size());
        w.u32(static_cast<std::uint32_t>(s->poly_order));
        w.u8(s->include_sine ? 1 : 0);
        w.f64(s->dt);
        w.u8(model.sindy() ? 1 : 0);
        if (model.sindy()) {
            w.f64(model.sindy()->threshold);
            w.matrix(model.sindy()->coefficients);
            w.matrix(model.sindy()->active);
        }
    } else if (const auto* rs = std::get_if<RecurrentForecasterSpec>(&model.forecaster_config())) {
        w.index(rs->window);
        w.u32(static_cast<std::uint32_t>(rs->cell));
        w.index(rs->hidden_size);
        w.index(rs->num_layers);
        w.u8(model.recurrent() ? 1 : 0);
        if (model.recurrent()) put_params(w, model.recurrent()->network);
    }
    return w.take();
}

ShredModel deserialize_checkpoint(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, "SHRD", "checkpoint");
    r.version(kCheckpointVersion);
    const NetworkSpec spec = get_spec(r);
    try {
        spec.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Io, std::string("checkpoint: invalid architecture: ") + e.what());
    }

    ModelConfig config;
    config.cell = spec.cell;
    config.hidden_size = spec.hidden_size;
    config.num_layers = spec.num_layers;
    config.decoder_layers = spec.decoder_layers;
    ShredModel model(config, spec.input_size, spec.output_size, 0);
    get_params(r, model.network(), "checkpoint");

    const std::uint32_t kind = r.u32();
    if (kind == static_cast<std::uint32_t>(ForecasterKind::Sindy)) {
        SindyForecasterSpec s;
        const Index latent = r.index();
        require(latent == spec.hidden_size, ErrorKind::Io, "checkpoint: SINDy latent size disagrees with network");
        s.poly_order = static_cast<int>(r.u32());
        s.include_sine = r.u8() != 0;
        s.dt = r.f64();
        model.set_forecaster(s);
        if (r.u8() != 0) {
            SindyModel sm = *model.sindy_template();
            sm.threshold = r.f64();
            sm.coefficients = r.matrix();
            sm.active = r.matrix();
            const Index terms = sm.library.term_count();
            require(sm.coefficients.rows() == terms && sm.coefficients.cols() == latent &&
                        sm.active.rows() == terms && sm.active.cols() == latent,
                    ErrorKind::Io, "checkpoint: SINDy coefficient shape disagrees with library");
            model.sindy() = std::move(sm);
        }
    } else if (kind == static_cast<std::uint32_t>(ForecasterKind::Recurrent)) {
        RecurrentForecasterSpec rs;
        rs.window = r.index();
        rs.cell = get_cell(r);
        rs.hidden_size = r.index();
        rs.num_layers = r.index();
        model.set_forecaster(rs);
        if (r.u8() != 0) {
            NetworkSpec fs;
            fs.cell = rs.cell;
            fs.input_size = spec.hidden_size;
            fs.hidden_size = rs.hidden_size;
            fs.num_layers = rs.num_layers;
            fs.decoder_layers = {};
            fs.output_size = spec.hidden_size;
            RecurrentForecaster rf{rs.window, Network(fs)};
            get_params(r, rf.network, "checkpoint forecaster");
            model.recurrent() = std::move(rf);
        }
    } else {
        require(kind == static_cast<std::uint32_t>(ForecasterKind::None), ErrorKind::Io,
                "checkpoint: unknown forecaster kind " + std::to_string(kind));
    }
    r.finish();
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const ShredModel& model)
{
    write_bytes(path, serialize_checkpoint(model));
}

ShredModel load_checkpoint(const std::filesystem::path& path)
{
    return deserialize_checkpoint(read_bytes(path));
}

CodecState codec_state(const DataManager& manager)
{
    CodecState state;
    for (const auto& f : manager.fields()) state.fields.push_back({f.id, f.spatial_shape, f.codec});
    state.sensor_scaler = manager.sensor_scaler();
    state.lags = manager.lags();
    return state;
}

std::vector<std::uint8_t> serialize_codecs(const CodecState& state)
{
    Writer w("SHCD");
    w.u32(kCodecVersion);
    w.index(state.lags);
    w.vector(state.sensor_scaler.minimum());
    w.vector(state.sensor_scaler.range());
    w.index(static_cast<Index>(state.fields.size()));
    for (const auto& f : state.fields) {
        w.string(f.id);
        w.index(static_cast<Index>(f.spatial_shape.size()));
        for (Index n : f.spatial_shape) w.index(n);
        w.index(f.codec.spatial_size());
        const Compression& c = f.codec.compression();
        w.u32(static_cast<std::uint32_t>(c.index()));
        if (const auto* svd = std::get_if<SvdCompression>(&c)) {
            w.index(svd->modes);
            w.vector(f.codec.svd()->S);
            w.matrix(f.codec.svd()->V);
        } else if (const auto* fc = std::get_if<FourierCompression>(&c)) {
            w.u32(static_cast<std::uint32_t>(fc->cutoff_x));
            w.u32(static_cast<std::uint32_t>(fc->cutoff_y));
        }
        w.vector(f.codec.scaler().minimum());
        w.vector(f.codec.scaler().range());
    }
    return w.take();
}

CodecState deserialize_codecs(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, "SHCD", "codec file");
    r.version(kCodecVersion);
    CodecState state;
    state.lags = r.index();
    Vector smin = r.vector();
    Vector srange = r.vector();
    state.sensor_scaler = MinMaxScaler(std::move(smin), std::move(srange));
    const Index count = r.index();
    for (Index i = 0; i < count; ++i) {
        CodecState::Field f;
        f.id = r.string();
        f.spatial_shape.resize(static_cast<std::size_t>(r.index()));
        for (Index& n : f.spatial_shape) n = r.index();
        const Index spatial = r.index();
        const std::uint32_t kind = r.u32();
        Compression compression;
        std::optional<SvdFactors> svd;
        std::optional<FourierTruncation> fourier;
        if (kind == 1) {
            SvdCompression c{r.index()};
            SvdFactors factors;
            factors.S = r.vector();
            factors.V = r.matrix();
            require(factors.V.rows() == spatial && factors.V.cols() == c.modes && factors.S.size() == c.modes,
                    ErrorKind::Io, "codec file: SVD basis shape disagrees with field '" + f.id + "'");
            compression = c;
            svd = std::move(factors);
        } else if (kind == 2) {
            FourierCompression c{static_cast<int>(r.u32()), static_cast<int>(r.u32())};
            require(f.spatial_shape.size() == 2, ErrorKind::Io, "codec file: Fourier codec needs a 2-D field");
            compression = c;
            fourier = FourierTruncation(f.spatial_shape[0], f.spatial_shape[1], c.cutoff_x, c.cutoff_y);
        } else {
            require(kind == 0, ErrorKind::Io, "codec file: unknown compression code " + std::to_string(kind));
        }
        Vector cmin = r.vector();
        Vector crange = r.vector();
        f.codec = FieldCodec::restore(compression, spatial, MinMaxScaler(std::move(cmin), std::move(crange)),
                                      std::move(svd), std::move(fourier));
        state.fields.push_back(std::move(f));
    }
    r.finish();
    return state;
}

void save_codecs(const std::filesystem::path& path, const CodecState& state)
{
    write_bytes(path, serialize_codecs(state));
}

CodecState load_codecs(const std::filesystem::path& path)
{
    return deserialize_codecs(read_bytes(path));
}

} // namespace shred
