// Compile-only driver for Janino: exit 0 when the file compiles, 1 otherwise.
// With a second argument, also runs that class's main method; an uncaught
// exception (a failed check) exits 1.
public class Janinoc {
  public static void main(String[] args) throws Exception {
    if (args.length < 1 || args.length > 2) {
      System.err.println("usage: Janinoc <File.java> [MainClass]");
      System.exit(2);
    }
    org.codehaus.janino.SimpleCompiler c = new org.codehaus.janino.SimpleCompiler();
    java.io.Reader r = new java.io.FileReader(args[0]);
    try {
      c.cook(args[0], r);
    } catch (org.codehaus.commons.compiler.CompileException e) {
      System.err.println(e.getMessage());
      System.exit(1);
    }
    if (args.length == 2) {
      Class<?> main = c.getClassLoader().loadClass(args[1]);
      try {
        java.lang.reflect.Method m = main.getMethod("main", new Class[] {String[].class});
        m.setAccessible(true);
        m.invoke(null, new Object[] {new String[0]});
      } catch (java.lang.reflect.InvocationTargetException e) {
        System.err.println("test failed: " + e.getCause());
        System.exit(1);
      }
    }
  }
}
