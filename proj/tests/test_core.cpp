#include <gtest/gtest.h>

#include "vulnreach/core.hpp"
#include "vulnreach/errors.hpp"
#include "vulnreach/hash.hpp"
#include "vulnreach/json_io.hpp"

using namespace vulnreach;

namespace {

CodeBlock block(const std::string& file, int start, int end, NodeKind kind = NodeKind::MethodDeclaration) {
    CodeBlock b;
    b.file_path = file;
    b.line_start = start;
    b.line_end = end;
    b.node_kind = kind;
    b.source = "x\n";
    b.id = make_block_id(file, start, end, kind);
    return b;
}

} // namespace

TEST(Hash, Fnv1aKnownVectors) {
    // Published FNV-1a 64 test vectors.
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(to_hex(0xabcULL), "0000000000000abc");
}

TEST(BlockId, DependsOnEveryComponent) {
    const std::string base = make_block_id("a/B.java", 3, 9, NodeKind::MethodDeclaration);
    EXPECT_EQ(base.size(), 16u);
    EXPECT_EQ(base, make_block_id("a/B.java", 3, 9, NodeKind::MethodDeclaration));
    EXPECT_NE(base, make_block_id("a/C.java", 3, 9, NodeKind::MethodDeclaration));
    EXPECT_NE(base, make_block_id("a/B.java", 4, 9, NodeKind::MethodDeclaration));
    EXPECT_NE(base, make_block_id("a/B.java", 3, 8, NodeKind::MethodDeclaration));
    EXPECT_NE(base, make_block_id("a/B.java", 3, 9, NodeKind::Other));
    // "1:23" and "12:3" must not collide through concatenation.
    EXPECT_NE(make_block_id("f", 1, 23, NodeKind::Other), make_block_id("f", 12, 3, NodeKind::Other));
}

TEST(BlockId, MatchesIndependentComputation) {
    // Value from tests/oracles/reference_encoder.py (block_id).
    EXPECT_EQ(make_block_id("src/A.java", 1, 12, NodeKind::CompilationUnit), "9cb5f22ad8c9c06e");
}

TEST(NodeKind, NamesRoundTrip) {
    for (auto k : {NodeKind::CompilationUnit, NodeKind::ImportDeclaration, NodeKind::FieldDeclaration,
                   NodeKind::MethodDeclaration, NodeKind::ConstructorDeclaration, NodeKind::Other})
        EXPECT_EQ(node_kind_from_string(to_string(k)), k);
    EXPECT_THROW(node_kind_from_string("Lambda"), std::invalid_argument);
    EXPECT_TRUE(is_split_kind(NodeKind::ImportDeclaration));
    EXPECT_FALSE(is_split_kind(NodeKind::CompilationUnit));
    EXPECT_FALSE(is_split_kind(NodeKind::Other));
}

TEST(Embedding, NormalizesAndRejectsZero) {
    Eigen::VectorXd raw(3);
    raw << 3.0, 0.0, 4.0;
    const auto e = EmbeddingVector::normalized(raw);
    EXPECT_NEAR(e.values().norm(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(e.values()[0], 0.6);
    EXPECT_THROW(EmbeddingVector::normalized(Eigen::VectorXd::Zero(3)), std::invalid_argument);
    EXPECT_THROW(EmbeddingVector::normalized(Eigen::VectorXd()), std::invalid_argument);
    EXPECT_THROW(EmbeddingVector::from_unit(raw), std::invalid_argument);
    EXPECT_NO_THROW(EmbeddingVector::from_unit(e.values()));
}

TEST(Embedding, CosineOfUnitVectors) {
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 0.0;
    b << 1.0, 1.0;
    EXPECT_NEAR(cosine(EmbeddingVector::normalized(a), EmbeddingVector::normalized(b)), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(cosine(EmbeddingVector::normalized(a), EmbeddingVector::normalized(a)), 1.0, 1e-12);
}

TEST(Candidate, ContextStartsWithAnchorAndOnlyGrows) {
    Candidate c(block("A.java", 1, 5), MatchedBy::Both, 0.5, 0.4);
    EXPECT_EQ(c.context().size(), 1u);
    EXPECT_EQ(c.anchor().line_start, 1);
    EXPECT_TRUE(c.add_context(block("A.java", 6, 9)));
    EXPECT_FALSE(c.add_context(block("A.java", 6, 9)));
    EXPECT_FALSE(c.add_context(block("A.java", 1, 5)));
    EXPECT_EQ(c.context().size(), 2u);
    EXPECT_EQ(c.anchor().line_start, 1);
}

TEST(Verdict, AggregationIsExistential) {
    using J = Judgment;
    EXPECT_EQ(aggregate({}), J::Secure);
    const std::vector<J> one{J::Secure, J::Vulnerable, J::Secure};
    EXPECT_EQ(aggregate(one), J::Vulnerable);
    const std::vector<J> none{J::Secure, J::Secure};
    EXPECT_EQ(aggregate(none), J::Secure);
}

TEST(Verdict, FinalizeRecomputesJudgment) {
    Verdict v;
    v.project_judgment = Judgment::Vulnerable;
    v.finalize();
    EXPECT_EQ(v.project_judgment, Judgment::Secure);
    CandidateJudgment c;
    c.judgment = Judgment::Vulnerable;
    v.per_candidate.push_back(c);
    v.finalize();
    EXPECT_EQ(v.project_judgment, Judgment::Vulnerable);
}

TEST(VulnSpec, ValidateRequiresFields) {
    VulnSpec v{"CVE-1", "lib", {"a.B.c()"}, "void test() {}", std::nullopt};
    EXPECT_NO_THROW(v.validate());
    auto bad = v;
    bad.api_signatures.clear();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = v;
    bad.pov_test_source = "  \n";
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = v;
    bad.vuln_id.clear();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(JsonIo, RoundTripsDomainTypes) {
    CodeBlock b = block("src/A.java", 2, 7);
    b.enclosing_class = "A";
    b.enclosing_method = "run";
    b.size = 12;
    EXPECT_EQ(Json(b).get<CodeBlock>(), b);

    Candidate c(b, MatchedBy::TestSimilarity, 0.25, 0.75);
    c.add_context(block("src/B.java", 1, 1, NodeKind::CompilationUnit));
    EXPECT_EQ(Json(c).get<Candidate>(), c);

    Verdict v;
    v.project_id = "p";
    v.vuln_id = "CVE-1";
    CandidateJudgment cj;
    cj.candidate_id = b.id;
    cj.context_ids = {b.id};
    cj.termination = TerminationReason::IterationCap;
    cj.judgment = Judgment::Vulnerable;
    cj.rationale = "reachable";
    v.per_candidate.push_back(cj);
    v.finalize();
    EXPECT_EQ(Json(v).get<Verdict>(), v);

    VulnSpec spec{"CVE-2", "lib", {"x.Y.z()"}, "test", std::string("desc")};
    EXPECT_EQ(Json(spec).get<VulnSpec>(), spec);

    Eigen::VectorXd raw(2);
    raw << 1.0, 2.0;
    const auto e = EmbeddingVector::normalized(raw);
    EXPECT_EQ(Json(e).get<EmbeddingVector>(), e);
}

TEST(JsonIo, ParseErrorsCarryLineAndColumn) {
    try {
        parse_json_text("{\n  \"a\": 1,\n  oops\n}", "m.json");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("m.json:3:"), std::string::npos) << e.what();
    }
}
