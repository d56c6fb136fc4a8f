#include <gtest/gtest.h>

#include <filesystem>

#include "shred/error.hpp"
#include "shred/io.hpp"
#include "shred/rng.hpp"

using namespace shred;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "shred_test_io";
    fs::create_directories(dir);
    return dir / name;
}

ModelConfig tiny(ForecasterConfig forecaster)
{
    ModelConfig c;
    c.hidden_size = 3;
    c.num_layers = 2;
    c.decoder_layers = {5};
    c.forecaster = std::move(forecaster);
    return c;
}

void expect_same_weights(const Network& a, const Network& b)
{
    ASSERT_EQ(a.spec(), b.spec());
    ASSERT_EQ(a.parameters().size(), b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i) EXPECT_EQ(a.parameters()[i], b.parameters()[i]);
}

} // namespace

TEST(DatasetFile, RoundTripAndHeader)
{
    FieldArray a = FieldArray::zeros({2, 3, 4});
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = 0.5 * static_cast<double>(i) - 3.0;
    const auto bytes = serialize_dataset("U", a);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SHDF");
    const std::size_t header = 4 + 4 + 4 + 1 + 4 + 4 + 3 * 8;
    EXPECT_EQ(bytes.size(), header + 24 * 8);
    const fs::path p = scratch("a.shdf");
    write_dataset(p, "U", a);
    const DatasetFile back = read_dataset(p);
    EXPECT_EQ(back.id, "U");
    EXPECT_EQ(back.array.shape(), a.shape());
    EXPECT_EQ(back.array.values(), a.values());
}

TEST(DatasetFile, EmptyLeadingAxis)
{
    const FieldArray empty = FieldArray::zeros({0, 4, 4});
    const DatasetFile back = deserialize_dataset(serialize_dataset("X", empty));
    EXPECT_EQ(back.array.shape(), (std::vector<Index>{0, 4, 4}));
    EXPECT_EQ(back.array.size(), 0);
}

TEST(DatasetFile, CorruptInputsAreIoErrors)
{
    const auto good = serialize_dataset("U", FieldArray::zeros({2, 2}));
    auto expect_io = [](const std::vector<std::uint8_t>& bytes, const std::string& fragment) {
        try {
            (void)deserialize_dataset(bytes);
            FAIL() << "expected failure: " << fragment;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Io);
            EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
        }
    };
    auto bad_magic = good;
    bad_magic[0] = 'X';
    expect_io(bad_magic, "magic");
    auto truncated = good;
    truncated.pop_back();
    expect_io(truncated, "payload");
    auto version = good;
    version[4] = 9;
    expect_io(version, "unsupported format version 9");
    EXPECT_THROW(read_dataset(scratch("does_not_exist.shdf")), Error);
}

TEST(Csv, WritesRows)
{
    Matrix m(2, 2);
    m << 1, 0.5, -2, 3;
    const fs::path p = scratch("m.csv");
    write_csv(p, m);
    const auto bytes = read_bytes(p);
    EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "1,0.5\n-2,3\n");
}

TEST(Checkpoint, RoundTripPlainModel)
{
    const ShredModel m(tiny({}), 2, 4, 3);
    const auto bytes = serialize_checkpoint(m);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SHRD");
    const ShredModel back = deserialize_checkpoint(bytes);
    expect_same_weights(m.network(), back.network());
    EXPECT_EQ(back.forecaster_kind(), ForecasterKind::None);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, RoundTripSindy)
{
    ShredModel m(tiny(SindyForecasterSpec{2, true, 0.2}), 2, 4, 3);
    SindyModel s = *m.sindy_template();
    s.coefficients = Matrix::Constant(s.library.term_count(), 3, 0.25);
    s.coefficients(0, 0) = 0.0;
    s.active = Matrix::Ones(s.library.term_count(), 3);
    s.active(0, 0) = 0.0;
    s.threshold = 0.05;
    m.sindy() = s;
    const ShredModel back = deserialize_checkpoint(serialize_checkpoint(m));
    ASSERT_TRUE(back.sindy().has_value());
    EXPECT_EQ(back.sindy()->coefficients, s.coefficients);
    EXPECT_EQ(back.sindy()->active, s.active);
    EXPECT_EQ(back.sindy()->library, s.library);
    EXPECT_EQ(back.sindy()->dt, 0.2);
    EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(m));
}

TEST(Checkpoint, RoundTripRecurrentForecaster)
{
    RecurrentForecasterSpec spec;
    spec.window = 4;
    spec.hidden_size = 5;
    ShredModel m(tiny(spec), 2, 4, 3);
    NetworkSpec fs;
    fs.input_size = 3;
    fs.hidden_size = 5;
    fs.num_layers = 1;
    fs.decoder_layers = {};
    fs.output_size = 3;
    m.recurrent() = RecurrentForecaster{4, Network(fs)};
    m.recurrent()->network.initialize(8);
    const ShredModel back = deserialize_checkpoint(serialize_checkpoint(m));
    ASSERT_TRUE(back.recurrent().has_value());
    EXPECT_EQ(back.recurrent()->window, 4);
    expect_same_weights(m.recurrent()->network, back.recurrent()->network);
}

TEST(Checkpoint, VersionMismatchIsExplicit)
{
    auto bytes = serialize_checkpoint(ShredModel(tiny({}), 2, 4, 3));
    bytes[4] = 2;
    try {
        (void)deserialize_checkpoint(bytes);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unsupported format version 2"), std::string::npos);
    }
    auto trailing = serialize_checkpoint(ShredModel(tiny({}), 2, 4, 3));
    trailing.push_back(0);
    EXPECT_THROW((void)deserialize_checkpoint(trailing), Error);
}

TEST(Codecs, RoundTrip)
{
    DataManager manager(ManagerOptions{2, 0.8, 0.1, 0.1});
    FieldArray a = FieldArray::zeros({20, 4, 6});
    Rng rng(1);
    for (double& x : a.values()) x = rng.normal();
    manager.add_data(a, "A", RandomSensors{2}, SvdCompression{3});
    manager.add_data(a, "B", NoSensors{}, FourierCompression{2, 1});
    manager.add_data(a, "C", NoSensors{}, NoCompression{});
    manager.prepare();
    const CodecState state = codec_state(manager);
    const auto bytes = serialize_codecs(state);
    const CodecState back = deserialize_codecs(bytes);
    EXPECT_EQ(serialize_codecs(back), bytes);
    ASSERT_EQ(back.fields.size(), 3u);
    const Matrix snaps = a.as_matrix(1);
    for (std::size_t i = 0; i < 3; ++i) {
        const FieldCodec& original = manager.fields()[i].codec;
        EXPECT_LE((back.fields[i].codec.encode(snaps) - original.encode(snaps)).cwiseAbs().maxCoeff(), 1e-15);
    }
}
