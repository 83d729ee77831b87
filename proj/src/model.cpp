#include "tcnlm/model.hpp"

#include <cstring>
#include <fstream>

namespace tcnlm {

TcnlmModel TcnlmModel::init(int D_lm, int D, const ModelConfig& cfg, RngStream& rng) {
    TcnlmModel m;
    m.ntm = NtmParams::init(D, cfg, rng);
    m.nlm = TclstmParams::init(D_lm, cfg, rng);
    m.enc_hidden1 = cfg.enc_hidden1;
    m.enc_hidden2 = cfg.enc_hidden2;
    m.layers = cfg.layers;
    return m;
}

void TcnlmModel::for_each(const std::function<void(const std::string&, Array&)>& fn) {
    ntm.for_each(fn);
    nlm.for_each(fn);
}

namespace {

constexpr char kMagic[12] = {'T', 'C', 'N', 'L', 'M', '-', 'C', 'K', 'P', 'T', '-', '1'};

void put_u32(std::ostream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, TcnlmModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<uint32_t>(model.nlm.D_lm));
    put_u32(out, static_cast<uint32_t>(model.ntm.D));
    put_u32(out, static_cast<uint32_t>(model.nlm.n_x));
    put_u32(out, static_cast<uint32_t>(model.nlm.n_h));
    put_u32(out, static_cast<uint32_t>(model.nlm.n_f));
    put_u32(out, static_cast<uint32_t>(model.nlm.T));
    put_u32(out, static_cast<uint32_t>(model.layers));
    put_u32(out, model.nlm.candidate_tanh ? 1u : 0u);
    put_u32(out, static_cast<uint32_t>(model.enc_hidden1));
    put_u32(out, static_cast<uint32_t>(model.enc_hidden2));
    put_f64(out, model.ntm.mu0);
    put_f64(out, model.ntm.sigma0);
    model.for_each([&](const std::string&, Array& a) {
        for (int i = 0; i < a.size(); ++i) put_f64(out, a[i]);
    });
    if (!out) throw DataError("checkpoint write failed: " + path);
}

TcnlmModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[12];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("bad checkpoint magic: " + path);
    ModelConfig cfg;
    const int D_lm = static_cast<int>(get_u32(in));
    const int D = static_cast<int>(get_u32(in));
    cfg.n_x = static_cast<int>(get_u32(in));
    cfg.n_h = static_cast<int>(get_u32(in));
    cfg.n_f = static_cast<int>(get_u32(in));
    cfg.T = static_cast<int>(get_u32(in));
    cfg.layers = static_cast<int>(get_u32(in));
    cfg.candidate_tanh = get_u32(in) != 0;
    cfg.enc_hidden1 = static_cast<int>(get_u32(in));
    cfg.enc_hidden2 = static_cast<int>(get_u32(in));
    cfg.mu0 = get_f64(in);
    cfg.sigma0 = get_f64(in);
    if (!in) throw DataError("truncated checkpoint header: " + path);

    RngStream rng(0);  // shapes only; data overwritten below
    TcnlmModel m = TcnlmModel::init(D_lm, D, cfg, rng);
    bool ok = true;
    m.for_each([&](const std::string&, Array& a) {
        for (int i = 0; i < a.size(); ++i) a[i] = get_f64(in);
        ok = ok && static_cast<bool>(in);
    });
    if (!ok || !in) throw DataError("truncated checkpoint tensors: " + path);
    char extra;
    if (in.read(&extra, 1)) throw DataError("trailing bytes in checkpoint: " + path);
    return m;
}

}  // namespace tcnlm
