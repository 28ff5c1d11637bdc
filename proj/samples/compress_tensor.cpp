//
// SPDX-License-Identifier: Apache-2.0
//
// Generates a smooth sparse 8-bit feature map, compresses it with every
// codec and round-trips the EBPC stream through its file container.
//

#include <algorithm>
#include <cstdio>
#include <string>

#include "ebpc/ebpc.hpp"

int main()
{
    ebpc::CorpusSpec spec;
    spec.shape = {1, 16, 32, 32};
    spec.target_sparsity = 0.7;
    const ebpc::TensorFile tensor = ebpc::generate_corpus(spec);
    const auto words = ebpc::flatten_for_compression(tensor);

    ebpc::CodecConfig config;
    std::printf("%zu words, sparsity %.3f\n", words.size(), ebpc::sparsity(words));
    for (ebpc::Codec codec : ebpc::kAllCodecs) {
        const auto streams = ebpc::encode(codec, words, config);
        std::printf("  %-9s %8llu bits  ratio %.3f\n", std::string(ebpc::to_string(codec)).c_str(),
                    static_cast<unsigned long long>(streams.compressed_bits()),
                    ebpc::compression_ratio(streams, config)->value());
    }

    const auto file = ebpc::write_ebpc(ebpc::ebpc_encode(words, config), config);
    const ebpc::EbpcFile back = ebpc::read_ebpc(file);
    const auto decoded = ebpc::ebpc_decode(back.streams, back.config);
    const bool same = std::equal(decoded.begin(), decoded.end(), words.begin(), words.end());
    std::printf("container %zu bytes, round trip %s\n", file.size(), same ? "ok" : "MISMATCH");
    return same ? 0 : 1;
}
