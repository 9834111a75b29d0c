print("some chatter")
print("% SZS status CounterSatisfiable for stub")
