#include <gtest/gtest.h>

#include "vulnreach/errors.hpp"
#include "vulnreach/java_syntax.hpp"

using namespace vulnreach;
using namespace vulnreach::java;

namespace {

std::vector<std::string> token_texts(const CompilationUnit& unit, const SyntaxNode& node) {
    std::vector<std::string> out;
    for (std::size_t i = node.first_token; i <= node.last_token; ++i)
        out.emplace_back(unit.token_text(i));
    return out;
}

const SyntaxNode& only_type(const CompilationUnit& unit) {
    for (const auto& c : unit.root().children)
        if (c.kind == SyntaxKind::TypeDeclaration)
            return c;
    throw std::runtime_error("no type");
}

} // namespace

TEST(JavaLexer, SkipsCommentsAndKeepsLiteralsWhole) {
    const auto r = lex("a /* } */ \"{ // }\" 'x' // tail }\nb");
    ASSERT_EQ(r.tokens.size(), 4u);
    EXPECT_EQ(r.tokens[1].kind, TokenKind::String);
    EXPECT_EQ(r.tokens[2].kind, TokenKind::Char);
    EXPECT_EQ(r.tokens[3].line, 2);
    EXPECT_EQ(r.comments.size(), 2u);
}

TEST(JavaLexer, TextBlocksSpanLines) {
    const auto r = lex("s = \"\"\"\n  a \" b }\n  \"\"\";");
    ASSERT_EQ(r.tokens.size(), 4u);
    EXPECT_EQ(r.tokens[2].kind, TokenKind::TextBlock);
    EXPECT_EQ(r.tokens[2].line, 1);
    EXPECT_EQ(r.tokens[2].end_line, 3);
}

TEST(JavaLexer, UnterminatedStringStopsAtEndOfLine) {
    const auto r = lex("x = \"oops\ny;");
    ASSERT_GE(r.tokens.size(), 4u);
    EXPECT_EQ(r.tokens.back().line, 2);
}

TEST(JavaParser, MinimalClassHasOneMethod) {
    auto units = parse_source("A.java", "class A { void m() {} }");
    ASSERT_EQ(units.size(), 1u);
    const auto& type = only_type(units[0]);
    EXPECT_EQ(type.name, "A");
    ASSERT_EQ(type.children.size(), 1u);
    EXPECT_EQ(type.children[0].kind, SyntaxKind::MethodDeclaration);
    EXPECT_EQ(type.children[0].name, "m");
    EXPECT_TRUE(units[0].errors().empty());
}

TEST(JavaParser, EmptyFileHasNoDeclarations) {
    auto units = parse_source("Empty.java", "");
    ASSERT_EQ(units.size(), 1u);
    EXPECT_TRUE(units[0].root().children.empty());
    EXPECT_EQ(units[0].line_count(), 0);
}

TEST(JavaParser, BrokenMethodBecomesErrorNode) {
    // Oracle recorded from the parser: the unclosed parameter list is cut at the
    // class's closing brace, leaving `void m (` as the error region.
    auto units = parse_source("Broken.java", "class A { void m( }");
    ASSERT_EQ(units.size(), 1u);
    const auto errors = units[0].errors();
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(token_texts(units[0], *errors[0]), (std::vector<std::string>{"void", "m", "("}));
    EXPECT_EQ(errors[0]->line_start, 1);
    EXPECT_EQ(errors[0]->line_end, 1);
    const auto& type = only_type(units[0]);
    EXPECT_NE(type.body_close, npos);
}

TEST(JavaParser, RecognizesMemberKinds) {
    const std::string src = R"(package p;

import java.util.List;
import static java.lang.Math.max;

@Deprecated
public final class Shop<T extends Item> extends Base implements Api {
    private static final int LIMIT = compute(new int[] {1, 2});
    List<T> items, extra;

    public Shop(int n) { super(n); }

    @Override
    public <R> R visit(Visitor<R> v) throws Exception {
        return v.go(() -> { return null; });
    }

    abstract void hook();

    static { init(); }

    enum Mode { A, B; int weight() { return 1; } }

    record Pair(int a, int b) {
        Pair {
            check(a);
        }
    }

    interface Listener { void on(String e); }

    @interface Marker { String value() default ""; }
}
)";
    auto units = parse_source("Shop.java", src);
    const auto& unit = units[0];
    EXPECT_TRUE(unit.errors().empty());
    const auto& root = unit.root();
    ASSERT_EQ(root.children.size(), 4u);
    EXPECT_EQ(root.children[0].kind, SyntaxKind::PackageDeclaration);
    EXPECT_EQ(root.children[1].kind, SyntaxKind::ImportDeclaration);
    EXPECT_EQ(root.children[2].kind, SyntaxKind::ImportDeclaration);
    const auto& shop = root.children[3];
    EXPECT_EQ(shop.kind, SyntaxKind::TypeDeclaration);
    EXPECT_EQ(shop.name, "Shop");
    EXPECT_EQ(shop.line_start, 6); // annotation included

    std::vector<std::pair<SyntaxKind, std::string>> members;
    for (const auto& c : shop.children)
        members.emplace_back(c.kind, c.name);
    const std::vector<std::pair<SyntaxKind, std::string>> expected{
        {SyntaxKind::FieldDeclaration, "LIMIT"},
        {SyntaxKind::FieldDeclaration, "items"},
        {SyntaxKind::ConstructorDeclaration, "Shop"},
        {SyntaxKind::MethodDeclaration, "visit"},
        {SyntaxKind::MethodDeclaration, "hook"},
        {SyntaxKind::Initializer, ""},
        {SyntaxKind::TypeDeclaration, "Mode"},
        {SyntaxKind::TypeDeclaration, "Pair"},
        {SyntaxKind::TypeDeclaration, "Listener"},
        {SyntaxKind::TypeDeclaration, "Marker"},
    };
    EXPECT_EQ(members, expected);

    const auto& mode = shop.children[6];
    ASSERT_EQ(mode.children.size(), 2u);
    EXPECT_EQ(mode.children[0].kind, SyntaxKind::EnumConstants);
    EXPECT_EQ(mode.children[1].kind, SyntaxKind::MethodDeclaration);

    const auto& pair = shop.children[7];
    ASSERT_EQ(pair.children.size(), 1u);
    EXPECT_EQ(pair.children[0].kind, SyntaxKind::ConstructorDeclaration);
}

TEST(JavaParser, LeadingLineIncludesJavadoc) {
    const std::string src = "class A {\n    int x;\n\n    /**\n     * Doc.\n     */\n    void m() {}\n}\n";
    auto units = parse_source("A.java", src);
    const auto& m = only_type(units[0]).children.at(1);
    EXPECT_EQ(m.line_start, 7);
    EXPECT_EQ(units[0].leading_line(m), 4);
}

TEST(JavaParser, LinesIncludeTerminators) {
    auto units = parse_source("A.java", "a\r\nb\nc");
    EXPECT_EQ(units[0].line_count(), 3);
    EXPECT_EQ(units[0].lines(1, 2), "a\r\nb\n");
    EXPECT_EQ(units[0].lines(3, 3), "c");
}

TEST(JavaParser, NulByteIsNotSource) {
    EXPECT_THROW(parse_source("bin.java", std::string("class A {}\0", 11)), ParseError);
}

TEST(JavaParser, StrayClosingBraceIsAnError) {
    auto units = parse_source("A.java", "class A {}\n}\nclass B {}\n");
    EXPECT_EQ(units[0].errors().size(), 1u);
    int types = 0;
    for (const auto& c : units[0].root().children)
        types += c.kind == SyntaxKind::TypeDeclaration;
    EXPECT_EQ(types, 2);
}
